#include <doctest.h>

#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "autonom/cybernft.hpp"
#include "autonom/hash.hpp"
#include "autonom/wallet.hpp"

using namespace autonom;

namespace {

const KeyPair& finder() {
  static KeyPair kp = generate_keypair("f1de");
  return kp;
}
const KeyPair& buyer() {
  static KeyPair kp = generate_keypair("ba1e");
  return kp;
}

IntrusionSignature demo_sig() {
  IntrusionSignature sig;
  sig.detector_id = "linear-svm";
  sig.feature_vector = {1.5, -2.0, 0.25};
  sig.label = "malicious";
  sig.first_seen = 1700000000000;
  return sig;
}

}  // namespace

TEST_CASE("token id hashes the signature identity, not the sighting") {
  IntrusionSignature sig = demo_sig();
  std::string id = token_id(sig);

  nlohmann::ordered_json expect;
  expect["detectorId"] = sig.detector_id;
  expect["featureVector"] = sig.feature_vector;
  expect["label"] = sig.label;
  CHECK(id == sha256_hex(expect.dump()));

  IntrusionSignature later = sig;
  later.first_seen += 999999;  // replay of the same signature elsewhere
  CHECK(token_id(later) == id);

  IntrusionSignature other = sig;
  other.label = "benign";
  CHECK(token_id(other) != id);
  other = sig;
  other.feature_vector[0] += 1e-9;
  CHECK(token_id(other) != id);
  other = sig;
  other.detector_id = "other-detector";
  CHECK(token_id(other) != id);
}

TEST_CASE("discovery mint pays the finder and records the token") {
  Chain chain(1);
  IntrusionSignature sig = demo_sig();

  auto block = mint_discovery(chain, finder().address(), sig, 1700000001000);
  REQUIRE(block.has_value());
  CHECK(chain.blocks().size() == 2);
  CHECK(chain.head() == *block);

  const Transaction& coinbase = block->transactions.back();
  REQUIRE(coinbase.is_coinbase());
  CHECK(coinbase.to_address == finder().address());
  CHECK(coinbase.amount == 10);
  CHECK(coinbase.metadata.at("cyberNFT") == token_id(sig));
  CHECK(coinbase.metadata.at("cyberNFTLabel") == sig.label);
  CHECK(chain.balance_of(finder().address()) == 10);
  CHECK(chain.validate().valid);

  CHECK(owner_of(chain, token_id(sig)) == finder().address());
  auto nfts = list_nfts(chain);
  REQUIRE(nfts.size() == 1);
  CHECK(nfts[0].token_id == token_id(sig));
  CHECK(nfts[0].minter == finder().address());
  CHECK(nfts[0].current_owner == finder().address());
  CHECK(nfts[0].mint_block_index == 1);
}

TEST_CASE("replayed discoveries do not mint twice") {
  Chain chain(1);
  IntrusionSignature sig = demo_sig();
  REQUIRE(mint_discovery(chain, finder().address(), sig, 1700000001000).has_value());

  IntrusionSignature replay = sig;
  replay.first_seen += 5000;  // another node sees the same attack later
  auto again = mint_discovery(chain, buyer().address(), replay, 1700000002000);
  CHECK_FALSE(again.has_value());
  CHECK(chain.blocks().size() == 2);
  CHECK(list_nfts(chain).size() == 1);
  CHECK(owner_of(chain, token_id(sig)) == finder().address());
}

TEST_CASE("ownership moves only through a confirmed owner transfer") {
  Chain chain(1);
  IntrusionSignature sig = demo_sig();
  const std::string token = token_id(sig);
  REQUIRE(mint_discovery(chain, finder().address(), sig, 1700000001000).has_value());

  SUBCASE("unknown tokens are rejected") {
    auto r = transfer_nft(chain, "deadbeef", finder(), buyer().address(), 1700000002000);
    REQUIRE(std::holds_alternative<TransferReject>(r));
    CHECK(std::get<TransferReject>(r) == TransferReject::UnknownToken);
  }

  SUBCASE("only the current owner can transfer") {
    auto r = transfer_nft(chain, token, buyer(), buyer().address(), 1700000002000);
    REQUIRE(std::holds_alternative<TransferReject>(r));
    CHECK(std::get<TransferReject>(r) == TransferReject::NotOwner);
  }

  SUBCASE("a queued transfer takes effect once mined") {
    auto r = transfer_nft(chain, token, finder(), buyer().address(), 1700000002000);
    REQUIRE(std::holds_alternative<Transaction>(r));
    const Transaction& tx = std::get<Transaction>(r);
    CHECK(tx.amount == 0);
    CHECK(tx.metadata.at("cyberNFT") == token);
    CHECK(chain.pending().size() == 1);
    CHECK(owner_of(chain, token) == finder().address());  // not confirmed yet

    chain.mine_pending(finder().address(), 1700000003000);
    CHECK(owner_of(chain, token) == buyer().address());
    CHECK(list_nfts(chain).size() == 1);
    CHECK(list_nfts(chain)[0].current_owner == buyer().address());
    CHECK(chain.validate().valid);

    // the old owner lost transfer rights with the token
    auto r2 = transfer_nft(chain, token, finder(), finder().address(), 1700000004000);
    REQUIRE(std::holds_alternative<TransferReject>(r2));
    CHECK(std::get<TransferReject>(r2) == TransferReject::NotOwner);

    // and the new owner can pass it on
    auto r3 = transfer_nft(chain, token, buyer(), finder().address(), 1700000005000);
    CHECK(std::holds_alternative<Transaction>(r3));
  }
}

TEST_CASE("a transfer faked by a non-owner on-chain is ignored by the scan") {
  Chain chain(1);
  IntrusionSignature sig = demo_sig();
  const std::string token = token_id(sig);
  REQUIRE(mint_discovery(chain, finder().address(), sig, 1700000001000).has_value());
  chain.mine_pending(buyer().address(), 1700000002000);  // fund the impostor

  // a signed zero-amount transaction carrying the token id, but not from
  // the owner: valid as a payment, inert as a transfer
  Transaction fake = make_signed_transaction(buyer(), buyer().address(), 0,
                                             {{"cyberNFT", token}}, 1700000003000);
  REQUIRE_FALSE(chain.add_transaction(fake).has_value());
  chain.mine_pending(buyer().address(), 1700000004000);

  CHECK(chain.validate().valid);
  CHECK(owner_of(chain, token) == finder().address());
}
