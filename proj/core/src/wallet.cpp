#include "autonom/wallet.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <cstring>
#include <memory>

namespace autonom {

namespace {

struct BnFree {
  void operator()(BIGNUM* p) const { BN_free(p); }
};
struct CtxFree {
  void operator()(BN_CTX* p) const { BN_CTX_free(p); }
};
struct PointFree {
  void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnFree>;
using CtxPtr = std::unique_ptr<BN_CTX, CtxFree>;
using PointPtr = std::unique_ptr<EC_POINT, PointFree>;

// shared, treated as immutable after creation
const EC_GROUP* group() {
  static EC_GROUP* g = [] {
    EC_GROUP* grp = EC_GROUP_new_by_curve_name(NID_secp256k1);
    if (grp == nullptr) throw WalletError("secp256k1 group unavailable");
    return grp;
  }();
  return g;
}

const BIGNUM* order() { return EC_GROUP_get0_order(group()); }

std::array<std::uint8_t, 32> bn_to_bytes32(const BIGNUM* bn) {
  std::array<std::uint8_t, 32> out{};
  if (BN_bn2binpad(bn, out.data(), static_cast<int>(out.size())) < 0) {
    throw WalletError("scalar too large");
  }
  return out;
}

BnPtr bytes_to_bn(std::span<const std::uint8_t> bytes) {
  BnPtr bn(BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), nullptr));
  if (!bn) throw WalletError("bignum allocation failed");
  return bn;
}

std::string bn_to_hex64(const BIGNUM* bn) {
  auto bytes = bn_to_bytes32(bn);
  return to_hex(std::span<const std::uint8_t>(bytes.data(), bytes.size()));
}

KeyPair keypair_from_scalar(const BIGNUM* d) {
  CtxPtr ctx(BN_CTX_new());
  PointPtr pub(EC_POINT_new(group()));
  if (!ctx || !pub || EC_POINT_mul(group(), pub.get(), d, nullptr, nullptr, ctx.get()) != 1) {
    throw WalletError("point multiplication failed");
  }
  std::array<std::uint8_t, 65> raw{};
  if (EC_POINT_point2oct(group(), pub.get(), POINT_CONVERSION_UNCOMPRESSED, raw.data(),
                         raw.size(), ctx.get()) != raw.size()) {
    throw WalletError("public key serialization failed");
  }
  KeyPair kp;
  kp.private_key = bn_to_hex64(d);
  kp.public_key = to_hex(std::span<const std::uint8_t>(raw.data(), raw.size()));
  return kp;
}

bool in_scalar_range(const BIGNUM* bn) {
  return BN_is_zero(bn) == 0 && BN_is_negative(bn) == 0 && BN_cmp(bn, order()) < 0;
}

BnPtr parse_private_key(std::string_view hex) {
  if (hex.size() != 64) throw WalletError("private key must be 64 hex chars");
  auto bytes = from_hex(hex);
  if (!bytes) throw WalletError("private key is not valid hex");
  BnPtr d = bytes_to_bn(*bytes);
  if (!in_scalar_range(d.get())) throw WalletError("private key out of range");
  return d;
}

// RFC 6979 deterministic nonce stream for SHA-256 / secp256k1.
class NonceStream {
 public:
  NonceStream(const std::array<std::uint8_t, 32>& key,
              const std::array<std::uint8_t, 32>& digest_octets) {
    v_.fill(0x01);
    k_.fill(0x00);
    feed(0x00, key, digest_octets);
    feed(0x01, key, digest_octets);
  }

  BnPtr next() {
    if (!first_) bump();
    first_ = false;
    while (true) {
      v_ = hmac_sha256(k_, v_);
      BnPtr k = bytes_to_bn(v_);
      if (in_scalar_range(k.get())) return k;
      bump();
    }
  }

 private:
  void feed(std::uint8_t tag, const std::array<std::uint8_t, 32>& key,
            const std::array<std::uint8_t, 32>& digest_octets) {
    std::array<std::uint8_t, 97> buf{};
    std::memcpy(buf.data(), v_.data(), 32);
    buf[32] = tag;
    std::memcpy(buf.data() + 33, key.data(), 32);
    std::memcpy(buf.data() + 65, digest_octets.data(), 32);
    k_ = hmac_sha256(k_, buf);
    v_ = hmac_sha256(k_, v_);
  }

  void bump() {
    std::array<std::uint8_t, 33> buf{};
    std::memcpy(buf.data(), v_.data(), 32);
    buf[32] = 0x00;
    k_ = hmac_sha256(k_, buf);
    v_ = hmac_sha256(k_, v_);
  }

  Digest v_{};
  Digest k_{};
  bool first_ = true;
};

}  // namespace

KeyPair generate_keypair() {
  BnPtr d(BN_new());
  if (!d) throw WalletError("bignum allocation failed");
  do {
    if (BN_priv_rand_range(d.get(), order()) != 1) throw WalletError("rng failure");
  } while (BN_is_zero(d.get()));
  return keypair_from_scalar(d.get());
}

KeyPair generate_keypair(std::string_view seed_hex) {
  auto seed = from_hex(seed_hex);
  if (!seed || seed->empty()) throw WalletError("seed must be non-empty hex");
  for (std::uint32_t counter = 0;; ++counter) {
    std::vector<std::uint8_t> buf = *seed;
    buf.push_back(static_cast<std::uint8_t>(counter >> 24));
    buf.push_back(static_cast<std::uint8_t>(counter >> 16));
    buf.push_back(static_cast<std::uint8_t>(counter >> 8));
    buf.push_back(static_cast<std::uint8_t>(counter));
    Digest candidate = sha256(std::span<const std::uint8_t>(buf.data(), buf.size()));
    BnPtr d = bytes_to_bn(candidate);
    if (in_scalar_range(d.get())) return keypair_from_scalar(d.get());
  }
}

KeyPair keypair_from_private(std::string_view private_key_hex) {
  BnPtr d = parse_private_key(private_key_hex);
  return keypair_from_scalar(d.get());
}

std::string sign(std::string_view private_key_hex, const Digest& digest) {
  BnPtr d = parse_private_key(private_key_hex);
  CtxPtr ctx(BN_CTX_new());
  if (!ctx) throw WalletError("bignum context allocation failed");
  const BIGNUM* n = order();

  BnPtr e = bytes_to_bn(digest);
  BN_nnmod(e.get(), e.get(), n, ctx.get());

  // bits2octets(digest): reduce mod n, re-pad to 32 bytes
  NonceStream nonces(bn_to_bytes32(d.get()), bn_to_bytes32(e.get()));

  BnPtr r(BN_new()), s(BN_new()), x(BN_new()), tmp(BN_new()), half(BN_new());
  PointPtr point(EC_POINT_new(group()));
  if (!r || !s || !x || !tmp || !half || !point) throw WalletError("bignum allocation failed");
  BN_rshift1(half.get(), n);

  while (true) {
    BnPtr k = nonces.next();
    if (EC_POINT_mul(group(), point.get(), k.get(), nullptr, nullptr, ctx.get()) != 1 ||
        EC_POINT_get_affine_coordinates(group(), point.get(), x.get(), nullptr, ctx.get()) != 1) {
      throw WalletError("point multiplication failed");
    }
    BN_nnmod(r.get(), x.get(), n, ctx.get());
    if (BN_is_zero(r.get())) continue;

    BnPtr kinv(BN_mod_inverse(nullptr, k.get(), n, ctx.get()));
    if (!kinv) throw WalletError("nonce inversion failed");
    BN_mod_mul(tmp.get(), r.get(), d.get(), n, ctx.get());
    BN_mod_add(tmp.get(), tmp.get(), e.get(), n, ctx.get());
    BN_mod_mul(s.get(), kinv.get(), tmp.get(), n, ctx.get());
    if (BN_is_zero(s.get())) continue;

    if (BN_cmp(s.get(), half.get()) > 0) BN_sub(s.get(), n, s.get());
    return bn_to_hex64(r.get()) + bn_to_hex64(s.get());
  }
}

bool verify(std::string_view public_key_hex, const Digest& digest,
            std::string_view signature_hex) {
  if (public_key_hex.size() != 130 || signature_hex.size() != 128) return false;
  auto pub_bytes = from_hex(public_key_hex);
  auto sig_bytes = from_hex(signature_hex);
  if (!pub_bytes || !sig_bytes || (*pub_bytes)[0] != 0x04) return false;

  CtxPtr ctx(BN_CTX_new());
  PointPtr q(EC_POINT_new(group()));
  if (!ctx || !q) return false;
  if (EC_POINT_oct2point(group(), q.get(), pub_bytes->data(), pub_bytes->size(), ctx.get()) != 1)
    return false;
  if (EC_POINT_is_on_curve(group(), q.get(), ctx.get()) != 1) return false;

  const BIGNUM* n = order();
  BnPtr r = bytes_to_bn(std::span<const std::uint8_t>(sig_bytes->data(), 32));
  BnPtr s = bytes_to_bn(std::span<const std::uint8_t>(sig_bytes->data() + 32, 32));
  if (!in_scalar_range(r.get()) || !in_scalar_range(s.get())) return false;

  BnPtr e = bytes_to_bn(digest);
  BN_nnmod(e.get(), e.get(), n, ctx.get());

  BnPtr w(BN_mod_inverse(nullptr, s.get(), n, ctx.get()));
  if (!w) return false;
  BnPtr u1(BN_new()), u2(BN_new()), x(BN_new());
  PointPtr point(EC_POINT_new(group()));
  if (!u1 || !u2 || !x || !point) return false;
  BN_mod_mul(u1.get(), e.get(), w.get(), n, ctx.get());
  BN_mod_mul(u2.get(), r.get(), w.get(), n, ctx.get());

  if (EC_POINT_mul(group(), point.get(), u1.get(), q.get(), u2.get(), ctx.get()) != 1)
    return false;
  if (EC_POINT_is_at_infinity(group(), point.get()) == 1) return false;
  if (EC_POINT_get_affine_coordinates(group(), point.get(), x.get(), nullptr, ctx.get()) != 1)
    return false;
  BN_nnmod(x.get(), x.get(), n, ctx.get());
  return BN_cmp(x.get(), r.get()) == 0;
}

}  // namespace autonom
