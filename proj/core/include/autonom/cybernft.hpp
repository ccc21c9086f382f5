#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "autonom/chain.hpp"

namespace autonom {

// metadata key marking a coinbase as an NFT mint; its value is the token id
inline constexpr std::string_view kNftMetadataKey = "cyberNFT";
inline constexpr std::string_view kNftLabelMetadataKey = "cyberNFTLabel";

struct IntrusionSignature {
  std::string detector_id;
  std::vector<double> feature_vector;
  std::string label;
  std::int64_t first_seen = 0;  // sighting time, not part of the token identity
};

// SHA-256 over the canonical (detectorId, featureVector, label) encoding.
// Replays of the same signature map to the same token.
std::string token_id(const IntrusionSignature& sig);

struct CyberNft {
  std::string token_id;
  std::string minter;
  std::string current_owner;
  std::size_t mint_block_index = 0;
};

// Mines a block whose coinbase carries the token in its metadata, paying the
// discoverer. Returns nullopt without mining when the token already exists
// on the confirmed chain.
std::optional<Block> mint_discovery(Chain& chain, const std::string& discoverer_address,
                                    const IntrusionSignature& sig, std::int64_t now_ms,
                                    std::optional<std::uint64_t> attempt_cap = std::nullopt);

enum class TransferReject { UnknownToken, NotOwner };
const char* to_string(TransferReject r);

// Queues a zero-amount transfer transaction carrying the token id. Confirmed
// ownership moves only once the transaction is mined.
std::variant<Transaction, TransferReject> transfer_nft(Chain& chain, std::string_view token,
                                                       const KeyPair& owner,
                                                       const std::string& to_address,
                                                       std::int64_t now_ms);

// Ownership per the confirmed chain, scanned left to right: the earliest
// coinbase carrying a token mints it; later mints of the same token are
// ignored; a transfer moves ownership only when sent by the current owner.
std::optional<std::string> owner_of(const Chain& chain, std::string_view token);
std::vector<CyberNft> list_nfts(const Chain& chain);

}  // namespace autonom
