#include "autonom/chain.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <utility>

namespace autonom {

namespace {

nlohmann::ordered_json canonical_tx(const Transaction& tx) {
  nlohmann::ordered_json j;
  if (tx.from_address) {
    j["fromAddress"] = *tx.from_address;
  } else {
    j["fromAddress"] = nullptr;
  }
  j["toAddress"] = tx.to_address;
  j["amount"] = tx.amount;
  j["metadata"] = tx.metadata;
  j["timestamp"] = tx.timestamp;
  return j;
}

}  // namespace

std::string canonical_transaction_json(const Transaction& tx) { return canonical_tx(tx).dump(); }

std::string canonical_transactions_json(std::span<const Transaction> txs) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& tx : txs) arr.push_back(canonical_tx(tx));
  return arr.dump();
}

std::string signing_preimage(const Transaction& tx) {
  if (tx.is_coinbase()) throw ChainError("coinbase transactions are never signed");
  return *tx.from_address + tx.to_address + std::to_string(tx.amount) +
         nlohmann::ordered_json(tx.metadata).dump() + std::to_string(tx.timestamp);
}

Digest signing_digest(const Transaction& tx) { return sha256(signing_preimage(tx)); }

std::string block_preimage(std::string_view previous_hash, std::int64_t timestamp,
                           std::span<const Transaction> txs, std::uint64_t nonce) {
  std::string out(previous_hash);
  out += std::to_string(timestamp);
  out += canonical_transactions_json(txs);
  out += std::to_string(nonce);
  return out;
}

std::string block_digest(std::string_view previous_hash, std::int64_t timestamp,
                         std::span<const Transaction> txs, std::uint64_t nonce) {
  return sha256_hex(block_preimage(previous_hash, timestamp, txs, nonce));
}

bool meets_difficulty(std::string_view digest_hex, int difficulty) {
  if (difficulty < 0) return false;
  auto required = static_cast<std::size_t>(difficulty);
  if (required > digest_hex.size()) return false;
  return digest_hex.substr(0, required).find_first_not_of('0') == std::string_view::npos;
}

MinedBlock mine_block(std::string previous_hash, std::int64_t timestamp,
                      std::vector<Transaction> transactions, int difficulty,
                      std::uint64_t starting_nonce, std::optional<std::uint64_t> attempt_cap) {
  std::string prefix = previous_hash;
  prefix += std::to_string(timestamp);
  prefix += canonical_transactions_json(transactions);

  std::uint64_t attempts = 0;
  for (std::uint64_t nonce = starting_nonce;; ++nonce) {
    ++attempts;
    std::string digest = sha256_hex(prefix + std::to_string(nonce));
    if (meets_difficulty(digest, difficulty)) {
      Block b;
      b.previous_hash = std::move(previous_hash);
      b.timestamp = timestamp;
      b.transactions = std::move(transactions);
      b.nonce = nonce;
      b.hash = std::move(digest);
      return MinedBlock{std::move(b), attempts};
    }
    if (attempt_cap && attempts >= *attempt_cap) {
      throw MiningCapExceeded("no nonce met difficulty " + std::to_string(difficulty) +
                              " within " + std::to_string(*attempt_cap) + " attempts");
    }
  }
}

Transaction make_signed_transaction(const KeyPair& from, std::string to_address,
                                    std::uint64_t amount,
                                    std::map<std::string, std::string> metadata,
                                    std::int64_t timestamp) {
  Transaction tx;
  tx.from_address = from.address();
  tx.to_address = std::move(to_address);
  tx.amount = amount;
  tx.metadata = std::move(metadata);
  tx.timestamp = timestamp;
  tx.signature = sign(from.private_key, signing_digest(tx));
  return tx;
}

const char* to_string(TxReject r) {
  switch (r) {
    case TxReject::Malformed: return "malformed";
    case TxReject::BadSignature: return "bad-signature";
    case TxReject::Overdraft: return "overdraft";
  }
  return "unknown";
}

const char* to_string(ChainFault f) {
  switch (f) {
    case ChainFault::None: return "none";
    case ChainFault::BadGenesis: return "bad-genesis";
    case ChainFault::LinkageBroken: return "linkage-broken";
    case ChainFault::DigestMismatch: return "digest-mismatch";
    case ChainFault::DifficultyNotMet: return "difficulty-not-met";
    case ChainFault::BadCoinbase: return "bad-coinbase";
    case ChainFault::BadSignature: return "bad-signature";
    case ChainFault::Overdraft: return "overdraft";
  }
  return "unknown";
}

const char* to_string(ReplaceResult r) {
  switch (r) {
    case ReplaceResult::Replaced: return "replaced";
    case ReplaceResult::KeptNotLonger: return "kept-not-longer";
    case ReplaceResult::KeptInvalid: return "kept-invalid";
    case ReplaceResult::KeptIncompatibleParams: return "kept-incompatible-params";
  }
  return "unknown";
}

Chain::Chain(int difficulty, std::uint64_t mining_reward)
    : difficulty_(difficulty), mining_reward_(mining_reward) {
  if (difficulty < 1) throw ChainError("difficulty must be positive");
  Block genesis;
  genesis.previous_hash = std::string(kGenesisPreviousHash);
  genesis.timestamp = kGenesisTimestampMs;
  genesis.nonce = kGenesisNonce;
  genesis.hash = block_digest(genesis.previous_hash, genesis.timestamp, genesis.transactions,
                              genesis.nonce);
  blocks_.push_back(std::move(genesis));
}

std::optional<TxReject> Chain::add_transaction(Transaction tx) {
  if (tx.is_coinbase() || tx.from_address->empty() || tx.to_address.empty()) {
    return TxReject::Malformed;
  }
  if (tx.signature.empty() || !verify(*tx.from_address, signing_digest(tx), tx.signature)) {
    return TxReject::BadSignature;
  }
  std::int64_t spendable = balance_of(*tx.from_address);
  for (const auto& p : pending_) {
    if (p.from_address == tx.from_address) spendable -= static_cast<std::int64_t>(p.amount);
  }
  if (spendable < 0 || static_cast<std::uint64_t>(spendable) < tx.amount) {
    return TxReject::Overdraft;
  }
  pending_.push_back(std::move(tx));
  return std::nullopt;
}

const Block& Chain::mine_pending(const std::string& reward_address, std::int64_t now_ms,
                                 std::map<std::string, std::string> coinbase_metadata,
                                 std::optional<std::uint64_t> attempt_cap) {
  if (reward_address.empty()) throw ChainError("reward address must be non-empty");
  Transaction coinbase;
  coinbase.to_address = reward_address;
  coinbase.amount = mining_reward_;
  coinbase.metadata = std::move(coinbase_metadata);
  coinbase.timestamp = now_ms;

  std::vector<Transaction> txs = pending_;
  txs.push_back(std::move(coinbase));
  MinedBlock mined =
      mine_block(head().hash, now_ms, std::move(txs), difficulty_, 0, attempt_cap);
  blocks_.push_back(std::move(mined.block));
  pending_.clear();
  return blocks_.back();
}

std::int64_t Chain::balance_of(std::string_view address) const {
  std::int64_t balance = 0;
  for (const auto& block : blocks_) {
    for (const auto& tx : block.transactions) {
      if (tx.from_address && *tx.from_address == address) {
        balance -= static_cast<std::int64_t>(tx.amount);
      }
      if (tx.to_address == address) balance += static_cast<std::int64_t>(tx.amount);
    }
  }
  return balance;
}

ValidationReport Chain::validate() const {
  auto fail = [](std::size_t index, ChainFault fault) {
    return ValidationReport{false, index, fault};
  };

  if (blocks_.empty()) return fail(0, ChainFault::BadGenesis);
  const Block& genesis = blocks_.front();
  if (genesis.previous_hash != kGenesisPreviousHash || genesis.timestamp != kGenesisTimestampMs ||
      !genesis.transactions.empty() || genesis.nonce != kGenesisNonce ||
      genesis.hash != block_digest(genesis.previous_hash, genesis.timestamp,
                                   genesis.transactions, genesis.nonce)) {
    return fail(0, ChainFault::BadGenesis);
  }

  std::unordered_map<std::string, std::int64_t> balances;
  for (std::size_t i = 1; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    if (b.previous_hash != blocks_[i - 1].hash) return fail(i, ChainFault::LinkageBroken);
    if (b.hash != block_digest(b.previous_hash, b.timestamp, b.transactions, b.nonce)) {
      return fail(i, ChainFault::DigestMismatch);
    }
    if (!meets_difficulty(b.hash, difficulty_)) return fail(i, ChainFault::DifficultyNotMet);

    std::size_t coinbase_count = 0;
    for (const auto& tx : b.transactions) {
      if (tx.is_coinbase()) {
        ++coinbase_count;
        if (tx.amount != mining_reward_) return fail(i, ChainFault::BadCoinbase);
      }
    }
    if (coinbase_count != 1) return fail(i, ChainFault::BadCoinbase);

    for (const auto& tx : b.transactions) {
      if (tx.is_coinbase()) continue;
      if (tx.signature.empty() || !verify(*tx.from_address, signing_digest(tx), tx.signature)) {
        return fail(i, ChainFault::BadSignature);
      }
    }

    for (const auto& tx : b.transactions) {
      if (tx.from_address) {
        auto& bal = balances[*tx.from_address];
        bal -= static_cast<std::int64_t>(tx.amount);
        if (bal < 0) return fail(i, ChainFault::Overdraft);
      }
      balances[tx.to_address] += static_cast<std::int64_t>(tx.amount);
    }
  }
  return ValidationReport{};
}

ReplaceResult Chain::replace_with(const Chain& other) {
  if (other.difficulty_ != difficulty_ || other.mining_reward_ != mining_reward_ ||
      other.blocks_.empty() || other.blocks_.front() != blocks_.front()) {
    return ReplaceResult::KeptIncompatibleParams;
  }
  if (other.blocks_.size() <= blocks_.size()) return ReplaceResult::KeptNotLonger;
  if (!other.validate().valid) return ReplaceResult::KeptInvalid;

  std::vector<Transaction> orphaned = std::move(pending_);
  blocks_ = other.blocks_;
  pending_.clear();

  auto confirmed = [this](const Transaction& tx) {
    return std::any_of(blocks_.begin(), blocks_.end(), [&](const Block& b) {
      return std::find(b.transactions.begin(), b.transactions.end(), tx) !=
             b.transactions.end();
    });
  };
  for (auto& tx : orphaned) {
    if (!confirmed(tx)) add_transaction(std::move(tx));  // drops ones that no longer pass
  }
  return ReplaceResult::Replaced;
}

namespace {

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const char* what) {
  if (!j.is_object()) throw ChainParseError(std::string(what) + " must be a JSON object");
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    auto in = [&key](std::initializer_list<const char*> names) {
      return std::any_of(names.begin(), names.end(),
                         [&key](const char* n) { return key == n; });
    };
    if (!in(required) && !in(optional)) {
      throw ChainParseError("unknown key \"" + key + "\" in " + what);
    }
  }
  for (const char* key : required) {
    if (!j.contains(key)) {
      throw ChainParseError("missing key \"" + std::string(key) + "\" in " + what);
    }
  }
}

std::uint64_t require_uint(const nlohmann::json& j, const char* what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
  throw ChainParseError(std::string(what) + " must be a non-negative integer");
}

std::int64_t require_int(const nlohmann::json& j, const char* what) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    throw ChainParseError(std::string(what) + " must be an integer");
  }
  return j.get<std::int64_t>();
}

std::string require_string(const nlohmann::json& j, const char* what) {
  if (!j.is_string()) throw ChainParseError(std::string(what) + " must be a string");
  return j.get<std::string>();
}

Transaction tx_from_json(const nlohmann::json& j, bool allow_coinbase) {
  require_keys(j, {"fromAddress", "toAddress", "amount", "metadata", "timestamp"},
               {"signature"}, "transaction");
  Transaction tx;
  const auto& from = j.at("fromAddress");
  if (from.is_null()) {
    if (!allow_coinbase) throw ChainParseError("pending transaction cannot be a coinbase");
    if (j.contains("signature")) throw ChainParseError("coinbase carries no signature");
  } else {
    tx.from_address = require_string(from, "fromAddress");
    if (!j.contains("signature")) {
      throw ChainParseError("missing key \"signature\" in transaction");
    }
    tx.signature = require_string(j.at("signature"), "signature");
  }
  tx.to_address = require_string(j.at("toAddress"), "toAddress");
  tx.amount = require_uint(j.at("amount"), "amount");
  const auto& meta = j.at("metadata");
  if (!meta.is_object()) throw ChainParseError("metadata must be a JSON object");
  for (const auto& item : meta.items()) {
    tx.metadata[item.key()] = require_string(item.value(), "metadata value");
  }
  tx.timestamp = require_int(j.at("timestamp"), "timestamp");
  return tx;
}

}  // namespace

nlohmann::ordered_json to_json(const Transaction& tx) {
  nlohmann::ordered_json j = canonical_tx(tx);
  if (!tx.is_coinbase()) j["signature"] = tx.signature;
  return j;
}

nlohmann::ordered_json to_json(const Block& b) {
  nlohmann::ordered_json jb;
  jb["previousHash"] = b.previous_hash;
  jb["timestamp"] = b.timestamp;
  auto txs = nlohmann::ordered_json::array();
  for (const auto& tx : b.transactions) txs.push_back(to_json(tx));
  jb["transactions"] = std::move(txs);
  jb["nonce"] = b.nonce;
  jb["hash"] = b.hash;
  return jb;
}

nlohmann::ordered_json Chain::to_json() const {
  nlohmann::ordered_json j;
  auto chain = nlohmann::ordered_json::array();
  for (const auto& b : blocks_) chain.push_back(autonom::to_json(b));
  j["chain"] = std::move(chain);
  j["difficulty"] = difficulty_;
  auto pending = nlohmann::ordered_json::array();
  for (const auto& tx : pending_) pending.push_back(autonom::to_json(tx));
  j["pendingTransactions"] = std::move(pending);
  j["miningReward"] = mining_reward_;
  return j;
}

Chain Chain::from_json(const nlohmann::json& j) {
  require_keys(j, {"chain", "difficulty", "pendingTransactions", "miningReward"}, {},
               "chain file");
  std::int64_t difficulty = require_int(j.at("difficulty"), "difficulty");
  if (difficulty < 1 || difficulty > 64) throw ChainParseError("difficulty out of range");
  std::uint64_t reward = require_uint(j.at("miningReward"), "miningReward");

  const auto& blocks = j.at("chain");
  if (!blocks.is_array() || blocks.empty()) {
    throw ChainParseError("chain must be a non-empty array of blocks");
  }

  Chain chain(static_cast<int>(difficulty), reward);
  chain.blocks_.clear();
  for (const auto& jb : blocks) {
    require_keys(jb, {"previousHash", "timestamp", "transactions", "nonce", "hash"}, {},
                 "block");
    Block b;
    b.previous_hash = require_string(jb.at("previousHash"), "previousHash");
    b.timestamp = require_int(jb.at("timestamp"), "timestamp");
    const auto& txs = jb.at("transactions");
    if (!txs.is_array()) throw ChainParseError("transactions must be an array");
    for (const auto& jt : txs) b.transactions.push_back(tx_from_json(jt, true));
    b.nonce = require_uint(jb.at("nonce"), "nonce");
    b.hash = require_string(jb.at("hash"), "hash");
    chain.blocks_.push_back(std::move(b));
  }

  const auto& pending = j.at("pendingTransactions");
  if (!pending.is_array()) throw ChainParseError("pendingTransactions must be an array");
  for (const auto& jt : pending) chain.pending_.push_back(tx_from_json(jt, false));
  return chain;
}

void Chain::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ChainIoError("cannot open " + path.string() + " for writing");
  out << to_json().dump(2) << '\n';
  if (!out) throw ChainIoError("failed writing " + path.string());
}

Chain Chain::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ChainIoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ChainParseError(e.what());
  }
  return from_json(j);
}

}  // namespace autonom
