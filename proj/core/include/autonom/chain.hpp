#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "autonom/hash.hpp"
#include "autonom/wallet.hpp"

namespace autonom {

struct ChainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ChainIoError : ChainError {
  using ChainError::ChainError;
};
struct ChainParseError : ChainError {
  using ChainError::ChainError;
};
struct MiningCapExceeded : ChainError {
  using ChainError::ChainError;
};

inline constexpr std::string_view kGenesisPreviousHash = "0";
inline constexpr std::int64_t kGenesisTimestampMs = 1483228800000;
inline constexpr std::uint64_t kGenesisNonce = 0;

struct Transaction {
  // nullopt marks a coinbase (serialized as JSON null)
  std::optional<std::string> from_address;
  std::string to_address;
  std::uint64_t amount = 0;
  std::map<std::string, std::string> metadata;
  std::int64_t timestamp = 0;
  std::string signature;  // empty on coinbase

  bool is_coinbase() const { return !from_address.has_value(); }
  bool operator==(const Transaction&) const = default;
};

struct Block {
  std::string previous_hash;
  std::int64_t timestamp = 0;
  std::vector<Transaction> transactions;
  std::uint64_t nonce = 0;
  std::string hash;

  bool operator==(const Block&) const = default;
};

// Canonical hashing bytes. Signatures never feed a block digest; the signing
// pre-image covers the payload fields only, so the id of a transaction is
// stable between signing and inclusion.
std::string canonical_transaction_json(const Transaction& tx);
std::string canonical_transactions_json(std::span<const Transaction> txs);
std::string signing_preimage(const Transaction& tx);
Digest signing_digest(const Transaction& tx);

std::string block_preimage(std::string_view previous_hash, std::int64_t timestamp,
                           std::span<const Transaction> txs, std::uint64_t nonce);
std::string block_digest(std::string_view previous_hash, std::int64_t timestamp,
                         std::span<const Transaction> txs, std::uint64_t nonce);

// difficulty == required count of leading '0' hex digits
bool meets_difficulty(std::string_view digest_hex, int difficulty);

// Wire/file JSON, same shapes the chain document embeds.
nlohmann::ordered_json to_json(const Transaction& tx);
nlohmann::ordered_json to_json(const Block& b);

struct MinedBlock {
  Block block;
  std::uint64_t attempts = 0;  // nonces tried, == nonce - starting_nonce + 1
};

// Scans nonces upward from starting_nonce; deterministic given inputs.
// Throws MiningCapExceeded if attempt_cap nonces fail to meet difficulty.
MinedBlock mine_block(std::string previous_hash, std::int64_t timestamp,
                      std::vector<Transaction> transactions, int difficulty,
                      std::uint64_t starting_nonce = 0,
                      std::optional<std::uint64_t> attempt_cap = std::nullopt);

Transaction make_signed_transaction(const KeyPair& from, std::string to_address,
                                    std::uint64_t amount,
                                    std::map<std::string, std::string> metadata,
                                    std::int64_t timestamp);

enum class TxReject { Malformed, BadSignature, Overdraft };
const char* to_string(TxReject r);

enum class ChainFault {
  None,
  BadGenesis,
  LinkageBroken,
  DigestMismatch,
  DifficultyNotMet,
  BadCoinbase,
  BadSignature,
  Overdraft,
};
const char* to_string(ChainFault f);

struct ValidationReport {
  bool valid = true;
  std::size_t block_index = 0;  // first offending block when !valid
  ChainFault fault = ChainFault::None;
};

enum class ReplaceResult { Replaced, KeptNotLonger, KeptInvalid, KeptIncompatibleParams };
const char* to_string(ReplaceResult r);

class Chain {
 public:
  explicit Chain(int difficulty = 2, std::uint64_t mining_reward = 10);

  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Transaction>& pending() const { return pending_; }
  int difficulty() const { return difficulty_; }
  std::uint64_t mining_reward() const { return mining_reward_; }
  const Block& head() const { return blocks_.back(); }

  // nullopt == accepted into the pending pool
  std::optional<TxReject> add_transaction(Transaction tx);

  // Mines pending transactions plus a trailing coinbase paying reward_address.
  // Clears the pending pool on success; the chain is untouched on throw.
  const Block& mine_pending(const std::string& reward_address, std::int64_t now_ms,
                            std::map<std::string, std::string> coinbase_metadata = {},
                            std::optional<std::uint64_t> attempt_cap = std::nullopt);

  // Confirmed balance (pending transactions excluded).
  std::int64_t balance_of(std::string_view address) const;

  ValidationReport validate() const;

  // Adopts other iff same genesis/difficulty/reward, valid, strictly longer.
  // Local pending transactions missing from the adopted chain are re-queued
  // through add_transaction; ones that no longer pass are dropped.
  ReplaceResult replace_with(const Chain& other);

  nlohmann::ordered_json to_json() const;
  static Chain from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Chain load(const std::filesystem::path& path);

  bool operator==(const Chain&) const = default;

 private:
  int difficulty_;
  std::uint64_t mining_reward_;
  std::vector<Block> blocks_;
  std::vector<Transaction> pending_;
};

}  // namespace autonom
