#include "autonom/netapi.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <shared_mutex>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "autonom/cybernft.hpp"

namespace autonom {

namespace {

using nlohmann::ordered_json;

std::int64_t wall_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void reply(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

// code<->status mapping is part of the wire contract, keep it in one place
void fail(httplib::Response& res, const std::string& code, const std::string& message) {
  int status = 400;
  if (code == "unknown-token") status = 404;
  else if (code == "not-owner") status = 403;
  else if (code == "duplicate" || code == "overdraft") status = 409;
  reply(res, status, ordered_json{{"error", {{"code", code}, {"message", message}}}});
}

std::optional<nlohmann::json> parse_body(const httplib::Request& req,
                                         httplib::Response& res) {
  auto j = nlohmann::json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    fail(res, "bad-request", "body must be a JSON object");
    return std::nullopt;
  }
  return j;
}

std::optional<std::string> want_string(const nlohmann::json& j, const char* key,
                                       httplib::Response& res) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    fail(res, "bad-request", std::string("\"") + key + "\" must be a string");
    return std::nullopt;
  }
  return j.at(key).get<std::string>();
}

std::optional<std::map<std::string, std::string>> want_metadata(const nlohmann::json& j,
                                                                httplib::Response& res) {
  std::map<std::string, std::string> metadata;
  if (!j.contains("metadata")) return metadata;
  const auto& m = j.at("metadata");
  if (!m.is_object()) {
    fail(res, "bad-request", "\"metadata\" must be an object");
    return std::nullopt;
  }
  for (const auto& item : m.items()) {
    if (!item.value().is_string()) {
      fail(res, "bad-request", "metadata values must be strings");
      return std::nullopt;
    }
    metadata[item.key()] = item.value().get<std::string>();
  }
  return metadata;
}

// key arrives in the body only; deriving the keypair also proves the key
// decodes to a point on the curve
std::optional<KeyPair> want_keypair(const nlohmann::json& j, httplib::Response& res) {
  auto key = want_string(j, "key", res);
  if (!key) return std::nullopt;
  try {
    return keypair_from_private(*key);
  } catch (const WalletError& e) {
    fail(res, "bad-signature", e.what());
    return std::nullopt;
  }
}

ordered_json nft_row(const CyberNft& nft) {
  return {{"tokenId", nft.token_id},
          {"minter", nft.minter},
          {"currentOwner", nft.current_owner},
          {"mintBlockIndex", nft.mint_block_index}};
}

}  // namespace

struct ApiServer::Impl {
  Node& node;
  ApiConfig cfg;
  std::unique_ptr<httplib::Server> server;
  std::thread worker;
  std::shared_mutex mu;
  std::vector<std::string> peer_urls;
  int bound_port = -1;
  std::atomic<bool> live{false};

  Impl(Node& n, ApiConfig c) : node(n), cfg(std::move(c)) {
    if (!cfg.now_ms) cfg.now_ms = wall_ms;
    if (!cfg.tls_cert_path.empty() || !cfg.tls_key_path.empty()) {
      if (cfg.tls_cert_path.empty() || cfg.tls_key_path.empty()) {
        throw ApiBindError("TLS needs both certificate and key paths");
      }
      auto ssl = std::make_unique<httplib::SSLServer>(cfg.tls_cert_path.c_str(),
                                                      cfg.tls_key_path.c_str());
      if (!ssl->is_valid()) throw ApiBindError("TLS certificate or key unusable");
      server = std::move(ssl);
    } else {
      server = std::make_unique<httplib::Server>();
    }
    route();
  }

  void route() {
    auto& s = *server;

    s.Get("/chain", [this](const httplib::Request&, httplib::Response& res) {
      std::shared_lock lock(mu);
      reply(res, 200, node.chain().to_json());
    });

    s.Get(R"(/blocks/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::shared_lock lock(mu);
      std::size_t i = 0;
      try {
        i = std::stoull(req.matches[1].str());
      } catch (const std::exception&) {
        fail(res, "bad-request", "block index out of range");
        return;
      }
      if (i >= node.chain().blocks().size()) {
        fail(res, "bad-request", "block index out of range");
        return;
      }
      reply(res, 200, to_json(node.chain().blocks()[i]));
    });

    s.Get("/pending", [this](const httplib::Request&, httplib::Response& res) {
      std::shared_lock lock(mu);
      auto arr = ordered_json::array();
      for (const auto& tx : node.chain().pending()) arr.push_back(to_json(tx));
      reply(res, 200, arr);
    });

    s.Get(R"(/balance/([^/]+))", [this](const httplib::Request& req,
                                        httplib::Response& res) {
      std::shared_lock lock(mu);
      const std::string address = req.matches[1];
      reply(res, 200,
            {{"address", address}, {"balance", node.chain().balance_of(address)}});
    });

    s.Get("/nfts", [this](const httplib::Request&, httplib::Response& res) {
      std::shared_lock lock(mu);
      auto arr = ordered_json::array();
      for (const auto& nft : list_nfts(node.chain())) arr.push_back(nft_row(nft));
      reply(res, 200, arr);
    });

    s.Get(R"(/nfts/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::shared_lock lock(mu);
      const std::string token = req.matches[1];
      for (const auto& nft : list_nfts(node.chain())) {
        if (nft.token_id == token) {
          reply(res, 200, nft_row(nft));
          return;
        }
      }
      fail(res, "unknown-token", "no such token on the confirmed chain");
    });

    s.Get("/alerts", [this](const httplib::Request&, httplib::Response& res) {
      std::shared_lock lock(mu);
      auto arr = ordered_json::array();
      for (const auto& a : node.alerts()) {
        arr.push_back({{"tokenId", a.token_id},
                       {"label", a.label},
                       {"sourceAddr", a.source_addr},
                       {"margin", a.margin},
                       {"tick", a.tick}});
      }
      reply(res, 200, arr);
    });

    s.Post("/transactions", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      auto kp = want_keypair(*body, res);
      if (!kp) return;
      auto to = want_string(*body, "toAddress", res);
      if (!to) return;
      if (!body->contains("amount") || !body->at("amount").is_number_unsigned()) {
        fail(res, "bad-request", "\"amount\" must be a non-negative integer");
        return;
      }
      auto metadata = want_metadata(*body, res);
      if (!metadata) return;
      if (body->contains("fromAddress")) {
        auto from = want_string(*body, "fromAddress", res);
        if (!from) return;
        if (*from != kp->address()) {
          fail(res, "bad-signature", "fromAddress does not match the supplied key");
          return;
        }
      }
      std::unique_lock lock(mu);
      Transaction tx =
          make_signed_transaction(*kp, *to, body->at("amount").get<std::uint64_t>(),
                                  *metadata, cfg.now_ms());
      for (const auto& queued : node.chain().pending()) {
        if (queued.signature == tx.signature) {
          fail(res, "duplicate", "identical transaction already pending");
          return;
        }
      }
      if (auto reject = node.chain().add_transaction(tx)) {
        switch (*reject) {
          case TxReject::Malformed: fail(res, "bad-request", to_string(*reject)); return;
          case TxReject::BadSignature: fail(res, "bad-signature", to_string(*reject)); return;
          case TxReject::Overdraft: fail(res, "overdraft", to_string(*reject)); return;
        }
      }
      reply(res, 200, {{"queued", to_json(tx)}});
    });

    s.Post("/mine", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      auto kp = want_keypair(*body, res);
      if (!kp) return;
      auto metadata = want_metadata(*body, res);
      if (!metadata) return;
      std::unique_lock lock(mu);
      const Block& block =
          node.chain().mine_pending(kp->address(), cfg.now_ms(), *metadata);
      reply(res, 200,
            {{"block", to_json(block)},
             {"balance", node.chain().balance_of(kp->address())}});
    });

    s.Post(R"(/nfts/([^/]+)/transfer)", [this](const httplib::Request& req,
                                               httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      auto kp = want_keypair(*body, res);
      if (!kp) return;
      auto to = want_string(*body, "toAddress", res);
      if (!to) return;
      std::unique_lock lock(mu);
      auto result =
          transfer_nft(node.chain(), std::string(req.matches[1]), *kp, *to, cfg.now_ms());
      if (auto* tx = std::get_if<Transaction>(&result)) {
        reply(res, 200, {{"queued", to_json(*tx)}});
        return;
      }
      switch (std::get<TransferReject>(result)) {
        case TransferReject::UnknownToken:
          fail(res, "unknown-token", "no such token on the confirmed chain");
          return;
        case TransferReject::NotOwner:
          fail(res, "not-owner", "key does not hold this token");
          return;
      }
    });

    s.Get("/peers", [this](const httplib::Request&, httplib::Response& res) {
      std::shared_lock lock(mu);
      reply(res, 200, {{"peers", peer_urls}});
    });

    s.Post("/peers", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      auto url = want_string(*body, "baseUrl", res);
      if (!url) return;
      if (url->empty()) {
        fail(res, "bad-request", "\"baseUrl\" must be non-empty");
        return;
      }
      std::unique_lock lock(mu);
      if (std::find(peer_urls.begin(), peer_urls.end(), *url) == peer_urls.end()) {
        peer_urls.push_back(*url);
      }
      reply(res, 200, {{"peers", peer_urls}});
    });

    s.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                               std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        fail(res, "bad-request", e.what());
      } catch (...) {
        fail(res, "bad-request", "unhandled error");
      }
    });
  }
};

ApiServer::ApiServer(Node& node, ApiConfig config)
    : impl_(std::make_unique<Impl>(node, std::move(config))) {}

ApiServer::~ApiServer() { stop(); }

void ApiServer::start() {
  if (impl_->live.load()) return;
  auto& s = *impl_->server;
  if (impl_->cfg.port == 0) {
    impl_->bound_port = s.bind_to_any_port(impl_->cfg.bind_address);
    if (impl_->bound_port < 0) {
      throw ApiBindError("cannot bind " + impl_->cfg.bind_address);
    }
  } else {
    if (!s.bind_to_port(impl_->cfg.bind_address, impl_->cfg.port)) {
      throw ApiBindError("cannot bind " + impl_->cfg.bind_address + ":" +
                         std::to_string(impl_->cfg.port));
    }
    impl_->bound_port = impl_->cfg.port;
  }
  impl_->worker = std::thread([this] { impl_->server->listen_after_bind(); });
  impl_->server->wait_until_ready();
  impl_->live.store(true);
}

void ApiServer::stop() {
  if (!impl_ || !impl_->live.exchange(false)) return;
  impl_->server->stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

int ApiServer::port() const { return impl_->bound_port; }

bool ApiServer::running() const { return impl_->live.load(); }

}  // namespace autonom
