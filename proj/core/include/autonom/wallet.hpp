#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "autonom/hash.hpp"

namespace autonom {

struct WalletError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Addresses are the raw uncompressed secp256k1 public key in hex
// ("04" + X + Y, 130 chars), matching what the ledger stores.
struct KeyPair {
  std::string private_key;  // 64 hex chars
  std::string public_key;   // 130 hex chars

  const std::string& address() const { return public_key; }
};

KeyPair generate_keypair();

// Deterministic: same seed, same keypair. Seed is hex, at least one byte.
KeyPair generate_keypair(std::string_view seed_hex);

// Recovers the public key for an existing private key.
// Throws WalletError when the key is malformed or out of range.
KeyPair keypair_from_private(std::string_view private_key_hex);

// ECDSA over secp256k1 with deterministic nonces (RFC 6979, SHA-256) and
// low-s normalization. Returns r || s as 128 hex chars.
// Throws WalletError on a malformed private key.
std::string sign(std::string_view private_key_hex, const Digest& digest);

// Total: malformed keys or signatures verify as false, never throw.
bool verify(std::string_view public_key_hex, const Digest& digest,
            std::string_view signature_hex);

}  // namespace autonom
