#include "autonom/cybernft.hpp"

#include <unordered_map>

namespace autonom {

std::string token_id(const IntrusionSignature& sig) {
  nlohmann::ordered_json j;
  j["detectorId"] = sig.detector_id;
  j["featureVector"] = sig.feature_vector;
  j["label"] = sig.label;
  return sha256_hex(j.dump());
}

const char* to_string(TransferReject r) {
  switch (r) {
    case TransferReject::UnknownToken: return "unknown-token";
    case TransferReject::NotOwner: return "not-owner";
  }
  return "unknown";
}

std::optional<Block> mint_discovery(Chain& chain, const std::string& discoverer_address,
                                    const IntrusionSignature& sig, std::int64_t now_ms,
                                    std::optional<std::uint64_t> attempt_cap) {
  std::string tid = token_id(sig);
  if (owner_of(chain, tid)) return std::nullopt;
  std::map<std::string, std::string> metadata{
      {std::string(kNftMetadataKey), tid},
      {std::string(kNftLabelMetadataKey), sig.label},
  };
  return chain.mine_pending(discoverer_address, now_ms, std::move(metadata), attempt_cap);
}

std::variant<Transaction, TransferReject> transfer_nft(Chain& chain, std::string_view token,
                                                       const KeyPair& owner,
                                                       const std::string& to_address,
                                                       std::int64_t now_ms) {
  auto current = owner_of(chain, token);
  if (!current) return TransferReject::UnknownToken;
  if (*current != owner.address()) return TransferReject::NotOwner;

  Transaction tx = make_signed_transaction(
      owner, to_address, 0, {{std::string(kNftMetadataKey), std::string(token)}}, now_ms);
  if (auto rejected = chain.add_transaction(tx)) {
    throw ChainError(std::string("nft transfer rejected: ") + to_string(*rejected));
  }
  return tx;
}

std::vector<CyberNft> list_nfts(const Chain& chain) {
  std::vector<CyberNft> out;
  std::unordered_map<std::string, std::size_t> by_token;
  const auto& blocks = chain.blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    for (const auto& tx : blocks[i].transactions) {
      auto it = tx.metadata.find(std::string(kNftMetadataKey));
      if (it == tx.metadata.end()) continue;
      const std::string& token = it->second;
      auto known = by_token.find(token);
      if (tx.is_coinbase()) {
        if (known == by_token.end()) {
          by_token.emplace(token, out.size());
          out.push_back(CyberNft{token, tx.to_address, tx.to_address, i});
        }
        // re-mint of an existing token changes nothing
      } else if (known != by_token.end() &&
                 *tx.from_address == out[known->second].current_owner) {
        out[known->second].current_owner = tx.to_address;
      }
      // transfers of unknown tokens or by non-owners are inert
    }
  }
  return out;
}

std::optional<std::string> owner_of(const Chain& chain, std::string_view token) {
  for (const auto& nft : list_nfts(chain)) {
    if (nft.token_id == token) return nft.current_owner;
  }
  return std::nullopt;
}

}  // namespace autonom
