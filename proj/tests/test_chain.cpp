#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autonom/chain.hpp"
#include "autonom/wallet.hpp"

using namespace autonom;

namespace {

const KeyPair& alice() {
  static KeyPair kp = generate_keypair("a11ce0");
  return kp;
}
const KeyPair& bob() {
  static KeyPair kp = generate_keypair("b0b0");
  return kp;
}

Chain funded_chain(int difficulty = 1) {
  Chain c(difficulty);
  c.mine_pending(alice().address(), 1700000000000);
  return c;
}

std::filesystem::path tmp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("genesis block is the fixed constant") {
  Chain c;
  REQUIRE(c.blocks().size() == 1);
  const Block& g = c.blocks()[0];
  CHECK(g.previous_hash == "0");
  CHECK(g.timestamp == 1483228800000);
  CHECK(g.transactions.empty());
  CHECK(g.nonce == 0);
  CHECK(g.hash == "cd1e9d208d0fa58d3e323758f9d59ed4fdc19e2292203cf18a9c34f2c032e182");
  CHECK(c.difficulty() == 2);
  CHECK(c.mining_reward() == 10);
  CHECK(c.pending().empty());
  CHECK(c.validate().valid);
}

TEST_CASE("canonical encodings are pinned") {
  CHECK(canonical_transactions_json({}) == "[]");
  CHECK(block_preimage("0", 1483228800000, {}, 0) == "01483228800000[]0");

  Transaction coinbase;
  coinbase.to_address = "04aa";
  coinbase.amount = 10;
  coinbase.metadata = {{"b", "2"}, {"a", "1"}};  // serializes sorted
  coinbase.timestamp = 1656867419168;
  CHECK(canonical_transaction_json(coinbase) ==
        R"({"fromAddress":null,"toAddress":"04aa","amount":10,)"
        R"("metadata":{"a":"1","b":"2"},"timestamp":1656867419168})");
  std::vector<Transaction> txs = {coinbase};
  CHECK(block_digest(std::string(64, '0'), 1656867419168, txs, 42) ==
        "3dee93c9caf79f86b864b496230269330c52bdb0f60437e4a964723d5a529d93");

  Transaction t;
  t.from_address = "04bb";
  t.to_address = "04cc";
  t.amount = 7;
  t.metadata = {{"k", "v"}};
  t.timestamp = 1700000000001;
  CHECK(signing_preimage(t) == R"(04bb04cc7{"k":"v"}1700000000001)");
  CHECK(to_hex(signing_digest(t)) ==
        "dfbc58c3a691093747438eee2a5ed897ec917081ff1ed0da707fffd02834e951");
}

TEST_CASE("signatures never feed the block digest") {
  Transaction t = make_signed_transaction(alice(), bob().address(), 3, {}, 1700000000000);
  Transaction stripped = t;
  stripped.signature.clear();
  std::vector<Transaction> with = {t};
  std::vector<Transaction> without = {stripped};
  CHECK(block_digest("0", 1, with, 0) == block_digest("0", 1, without, 0));
  CHECK(signing_digest(t) == signing_digest(stripped));
}

TEST_CASE("difficulty predicate counts leading zero hex digits") {
  CHECK(meets_difficulty("00ab", 2));
  CHECK(meets_difficulty("00ab", 0));
  CHECK_FALSE(meets_difficulty("00ab", 3));
  CHECK_FALSE(meets_difficulty("0", 2));
  CHECK(meets_difficulty("0", 1));
}

TEST_CASE("mining is deterministic and counts attempts") {
  auto a = mine_block("abc", 1700000000000, {}, 2, 0);
  auto b = mine_block("abc", 1700000000000, {}, 2, 0);
  CHECK(a.block.hash == b.block.hash);
  CHECK(a.block.nonce == b.block.nonce);
  CHECK(a.attempts == a.block.nonce + 1);
  CHECK(meets_difficulty(a.block.hash, 2));
  CHECK(a.block.hash == block_digest("abc", 1700000000000, {}, a.block.nonce));

  CHECK_THROWS_AS(mine_block("abc", 1700000000000, {}, 6, 0, 10), MiningCapExceeded);
}

TEST_CASE("mine_pending pays the reward and clears the pool") {
  Chain c(1);
  const Block& b1 = c.mine_pending(alice().address(), 1700000000000);
  REQUIRE(b1.transactions.size() == 1);
  CHECK(b1.transactions.back().is_coinbase());
  CHECK(b1.transactions.back().to_address == alice().address());
  CHECK(b1.transactions.back().amount == 10);
  CHECK(meets_difficulty(b1.hash, 1));
  CHECK(b1.previous_hash == c.blocks()[0].hash);
  CHECK(c.balance_of(alice().address()) == 10);
  CHECK(c.pending().empty());
  CHECK(c.validate().valid);

  std::map<std::string, std::string> meta = {{"cyberNFT", "NewDiscovery"}};
  const Block& b2 = c.mine_pending(alice().address(), 1700000001000, meta);
  CHECK(b2.transactions.back().metadata == meta);
  CHECK(c.balance_of(alice().address()) == 20);
}

TEST_CASE("transaction admission checks shape, signature, and funds") {
  Chain c = funded_chain();

  SUBCASE("well-formed spend is accepted and confirmed by mining") {
    Transaction t = make_signed_transaction(alice(), bob().address(), 4, {{"memo", "x"}},
                                            1700000001000);
    CHECK_FALSE(c.add_transaction(t).has_value());
    CHECK(c.pending().size() == 1);
    CHECK(c.balance_of(bob().address()) == 0);  // pending is not confirmed
    c.mine_pending(bob().address(), 1700000002000);
    CHECK(c.balance_of(bob().address()) == 14);
    CHECK(c.balance_of(alice().address()) == 6);
    CHECK(c.validate().valid);
  }

  SUBCASE("coinbase-shaped submissions are malformed") {
    Transaction t;
    t.to_address = bob().address();
    t.amount = 1;
    t.timestamp = 1;
    CHECK(c.add_transaction(t) == TxReject::Malformed);
  }

  SUBCASE("missing recipient is malformed") {
    Transaction t = make_signed_transaction(alice(), "", 1, {}, 1700000001000);
    CHECK(c.add_transaction(t) == TxReject::Malformed);
  }

  SUBCASE("wrong key is a bad signature") {
    Transaction t = make_signed_transaction(alice(), bob().address(), 4, {}, 1700000001000);
    t.signature = sign(bob().private_key, signing_digest(t));
    CHECK(c.add_transaction(t) == TxReject::BadSignature);
  }

  SUBCASE("tampered payload after signing is a bad signature") {
    Transaction t = make_signed_transaction(alice(), bob().address(), 4, {}, 1700000001000);
    t.amount = 5;
    CHECK(c.add_transaction(t) == TxReject::BadSignature);
  }

  SUBCASE("spending more than the confirmed balance is an overdraft") {
    Transaction t = make_signed_transaction(alice(), bob().address(), 11, {}, 1700000001000);
    CHECK(c.add_transaction(t) == TxReject::Overdraft);
  }

  SUBCASE("pending spends count against the balance") {
    auto t1 = make_signed_transaction(alice(), bob().address(), 6, {}, 1700000001000);
    auto t2 = make_signed_transaction(alice(), bob().address(), 6, {}, 1700000001001);
    CHECK_FALSE(c.add_transaction(t1).has_value());
    CHECK(c.add_transaction(t2) == TxReject::Overdraft);
  }

  SUBCASE("zero-amount transfers pass fund checks") {
    Transaction t = make_signed_transaction(alice(), bob().address(), 0,
                                            {{"cyberNFT", "t"}}, 1700000001000);
    CHECK_FALSE(c.add_transaction(t).has_value());
  }
}

TEST_CASE("chain document carries exactly the wire key set") {
  Chain c = funded_chain();
  auto t = make_signed_transaction(alice(), bob().address(), 2, {}, 1700000001000);
  REQUIRE_FALSE(c.add_transaction(t).has_value());
  c.mine_pending(alice().address(), 1700000002000);

  nlohmann::ordered_json doc = c.to_json();
  std::vector<std::string> top;
  for (const auto& item : doc.items()) top.push_back(item.key());
  CHECK(top == std::vector<std::string>{"chain", "difficulty", "pendingTransactions",
                                        "miningReward"});
  for (const auto& jb : doc["chain"]) {
    std::vector<std::string> keys;
    for (const auto& item : jb.items()) keys.push_back(item.key());
    CHECK(keys == std::vector<std::string>{"previousHash", "timestamp", "transactions",
                                           "nonce", "hash"});
    for (const auto& jt : jb["transactions"]) {
      std::vector<std::string> tkeys;
      for (const auto& item : jt.items()) tkeys.push_back(item.key());
      if (jt["fromAddress"].is_null()) {
        CHECK(tkeys == std::vector<std::string>{"fromAddress", "toAddress", "amount",
                                                "metadata", "timestamp"});
      } else {
        CHECK(tkeys == std::vector<std::string>{"fromAddress", "toAddress", "amount",
                                                "metadata", "timestamp", "signature"});
      }
    }
  }
}

TEST_CASE("chain document round-trips through JSON and disk") {
  Chain c = funded_chain();
  auto t = make_signed_transaction(alice(), bob().address(), 2, {{"m", "1"}},
                                   1700000001000);
  REQUIRE_FALSE(c.add_transaction(t).has_value());
  c.mine_pending(bob().address(), 1700000002000);
  auto t2 = make_signed_transaction(alice(), bob().address(), 1, {}, 1700000003000);
  REQUIRE_FALSE(c.add_transaction(t2).has_value());  // keep one pending

  Chain back = Chain::from_json(c.to_json());
  CHECK(back == c);

  auto path = tmp_file("autonom_chain_roundtrip.json");
  c.save(path);
  CHECK(Chain::load(path) == c);
  std::filesystem::remove(path);
}

TEST_CASE("chain parsing is strict") {
  Chain c = funded_chain();
  nlohmann::json doc = c.to_json();

  SUBCASE("unknown top-level key") {
    doc["extra"] = 1;
    CHECK_THROWS_AS(Chain::from_json(doc), ChainParseError);
  }
  SUBCASE("missing required key") {
    doc.erase("miningReward");
    CHECK_THROWS_AS(Chain::from_json(doc), ChainParseError);
  }
  SUBCASE("unknown block key") {
    doc["chain"][0]["surprise"] = true;
    CHECK_THROWS_AS(Chain::from_json(doc), ChainParseError);
  }
  SUBCASE("wrong type") {
    doc["difficulty"] = "two";
    CHECK_THROWS_AS(Chain::from_json(doc), ChainParseError);
  }
  SUBCASE("coinbase with a signature key") {
    doc["chain"][1]["transactions"][0]["signature"] = "00";
    CHECK_THROWS_AS(Chain::from_json(doc), ChainParseError);
  }
  SUBCASE("not an object") {
    CHECK_THROWS_AS(Chain::from_json(nlohmann::json::array()), ChainParseError);
  }
}

TEST_CASE("validation reports the first offending block") {
  Chain good(1);
  good.mine_pending(alice().address(), 1700000000000);
  auto t = make_signed_transaction(alice(), bob().address(), 4, {}, 1700000001000);
  REQUIRE_FALSE(good.add_transaction(t).has_value());
  good.mine_pending(alice().address(), 1700000002000);
  good.mine_pending(bob().address(), 1700000003000);
  REQUIRE(good.validate().valid);

  auto tamper = [&](auto mutate) {
    nlohmann::json doc = good.to_json();
    mutate(doc);
    return Chain::from_json(doc).validate();
  };

  SUBCASE("genesis drift") {
    auto r = tamper([](nlohmann::json& d) { d["chain"][0]["timestamp"] = 1; });
    CHECK_FALSE(r.valid);
    CHECK(r.block_index == 0);
    CHECK(r.fault == ChainFault::BadGenesis);
  }
  SUBCASE("edited amount breaks the digest") {
    auto r = tamper([](nlohmann::json& d) {
      d["chain"][2]["transactions"][0]["amount"] = 5;
    });
    CHECK_FALSE(r.valid);
    CHECK(r.block_index == 2);
    CHECK(r.fault == ChainFault::DigestMismatch);
  }
  SUBCASE("edited stored hash is caught at the same block") {
    auto r = tamper([](nlohmann::json& d) {
      std::string h = d["chain"][1]["hash"];
      h[10] = h[10] == 'a' ? 'b' : 'a';
      d["chain"][1]["hash"] = h;
    });
    CHECK_FALSE(r.valid);
    CHECK(r.block_index == 1);
    CHECK(r.fault == ChainFault::DigestMismatch);
  }
  SUBCASE("broken linkage") {
    auto r = tamper([&](nlohmann::json& d) {
      d["chain"][2]["previousHash"] = std::string(64, '0');
    });
    CHECK_FALSE(r.valid);
    CHECK(r.block_index == 2);
  }
  SUBCASE("swapped signature") {
    auto other = make_signed_transaction(alice(), bob().address(), 4, {}, 1700000009000);
    auto r = tamper([&](nlohmann::json& d) {
      d["chain"][2]["transactions"][0]["signature"] = other.signature;
    });
    CHECK_FALSE(r.valid);
    CHECK(r.block_index == 2);
    CHECK(r.fault == ChainFault::BadSignature);
  }
}

TEST_CASE("overdraft inside a remined block is caught by validation") {
  // hand-build a structurally perfect chain whose payload overspends
  Chain base(1);
  base.mine_pending(alice().address(), 1700000000000);

  Transaction spend = make_signed_transaction(alice(), bob().address(), 999, {},
                                              1700000001000);
  Transaction coinbase;
  coinbase.to_address = alice().address();
  coinbase.amount = 10;
  coinbase.timestamp = 1700000002000;
  auto mined = mine_block(base.head().hash, 1700000002000, {spend, coinbase}, 1);

  nlohmann::json doc = base.to_json();
  nlohmann::json jb;
  jb["previousHash"] = mined.block.previous_hash;
  jb["timestamp"] = mined.block.timestamp;
  jb["transactions"] = nlohmann::json::array();
  for (const auto& tx : mined.block.transactions) {
    jb["transactions"].push_back(nlohmann::json(to_json(tx)));
  }
  jb["nonce"] = mined.block.nonce;
  jb["hash"] = mined.block.hash;
  doc["chain"].push_back(jb);

  auto r = Chain::from_json(doc).validate();
  CHECK_FALSE(r.valid);
  CHECK(r.block_index == 2);
  CHECK(r.fault == ChainFault::Overdraft);
}

TEST_CASE("longest valid chain wins and orphaned pending is re-queued") {
  Chain a(1);
  a.mine_pending(alice().address(), 1700000000000);
  Chain b = a;

  // b races ahead by two blocks
  b.mine_pending(bob().address(), 1700000001000);
  b.mine_pending(bob().address(), 1700000002000);

  // a holds a pending spend that b never saw
  auto t = make_signed_transaction(alice(), bob().address(), 3, {}, 1700000001500);
  REQUIRE_FALSE(a.add_transaction(t).has_value());

  SUBCASE("adopts the longer chain") {
    CHECK(a.replace_with(b) == ReplaceResult::Replaced);
    CHECK(a.blocks().size() == 4);
    CHECK(a.head().hash == b.head().hash);
    REQUIRE(a.pending().size() == 1);  // orphaned spend is back in the pool
    CHECK(a.pending()[0] == t);
    CHECK(a.validate().valid);
  }

  SUBCASE("keeps state against shorter or equal chains") {
    Chain longer = a;
    longer.mine_pending(alice().address(), 1700000003000);
    CHECK(longer.replace_with(a) == ReplaceResult::KeptNotLonger);
    Chain same = a;
    CHECK(a.replace_with(same) == ReplaceResult::KeptNotLonger);
  }

  SUBCASE("rejects tampered chains regardless of length") {
    nlohmann::json doc = b.to_json();
    doc["chain"][2]["transactions"][0]["amount"] = 99;
    Chain evil = Chain::from_json(doc);
    CHECK(a.replace_with(evil) == ReplaceResult::KeptInvalid);
    CHECK(a.blocks().size() == 1 + 1);
  }

  SUBCASE("rejects parameter-incompatible chains") {
    Chain other(2);
    other.mine_pending(bob().address(), 1700000001000);
    other.mine_pending(bob().address(), 1700000002000);
    other.mine_pending(bob().address(), 1700000003000);
    CHECK(a.replace_with(other) == ReplaceResult::KeptIncompatibleParams);
  }

  SUBCASE("re-queued pending that no longer passes is dropped") {
    // the adopted chain drains alice before the orphaned spend re-queues
    auto big = make_signed_transaction(alice(), bob().address(), 10, {}, 1700000001600);
    Chain c2 = b;
    REQUIRE_FALSE(c2.add_transaction(big).has_value());
    c2.mine_pending(bob().address(), 1700000004000);
    CHECK(a.replace_with(c2) == ReplaceResult::Replaced);
    CHECK(a.pending().empty());  // alice's 3-coin spend would now overdraw
  }
}

TEST_CASE("balance accounting nets transfers and rewards") {
  Chain c = funded_chain();
  auto t1 = make_signed_transaction(alice(), bob().address(), 4, {}, 1700000001000);
  REQUIRE_FALSE(c.add_transaction(t1).has_value());
  c.mine_pending(bob().address(), 1700000002000);  // bob: +4 +10 reward

  CHECK(c.balance_of(alice().address()) == 6);
  CHECK(c.balance_of(bob().address()) == 14);
  CHECK(c.balance_of("nobody") == 0);
}
