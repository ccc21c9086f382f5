// Operator entry point: wallets, chain files, a node behind the REST API,
// deterministic scenario runs, classifier training, and the queueing math.
// Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "autonom/chain.hpp"
#include "autonom/classifier.hpp"
#include "autonom/cybernft.hpp"
#include "autonom/netapi.hpp"
#include "autonom/node.hpp"
#include "autonom/perfmodel.hpp"
#include "autonom/scenario.hpp"
#include "autonom/wallet.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int cmd_wallet_new(const std::string& seed_hex) {
  autonom::KeyPair kp =
      seed_hex.empty() ? autonom::generate_keypair() : autonom::generate_keypair(seed_hex);
  nlohmann::ordered_json j;
  j["address"] = kp.address();
  j["publicKey"] = kp.public_key;
  j["privateKey"] = kp.private_key;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_chain_validate(const std::string& path) {
  autonom::Chain chain = autonom::Chain::load(path);
  autonom::ValidationReport report = chain.validate();
  if (report.valid) {
    std::cout << "valid: " << chain.blocks().size() << " blocks, head "
              << chain.head().hash << "\n";
    return 0;
  }
  std::cout << "invalid: " << autonom::to_string(report.fault) << " at block "
            << report.block_index << "\n";
  return 1;
}

int cmd_chain_show(const std::string& path) {
  autonom::Chain chain = autonom::Chain::load(path);
  std::cout << "difficulty " << chain.difficulty() << ", reward "
            << chain.mining_reward() << ", " << chain.blocks().size() << " blocks, "
            << chain.pending().size() << " pending\n\n";
  for (std::size_t i = 0; i < chain.blocks().size(); ++i) {
    const auto& b = chain.blocks()[i];
    std::cout << "#" << i << "  " << b.hash.substr(0, 20) << "...  ts " << b.timestamp
              << "  " << b.transactions.size() << " tx\n";
    for (const auto& tx : b.transactions) {
      std::cout << "    " << (tx.is_coinbase() ? "coinbase" : tx.from_address->substr(0, 12))
                << " -> " << tx.to_address.substr(0, 12) << "  " << tx.amount;
      if (auto it = tx.metadata.find("cyberNFT"); it != tx.metadata.end()) {
        std::cout << "  [cyberNFT " << it->second.substr(0, 12) << "]";
      }
      std::cout << "\n";
    }
  }
  auto nfts = autonom::list_nfts(chain);
  if (!nfts.empty()) {
    std::cout << "\ntokens\n";
    for (const auto& nft : nfts) {
      std::cout << "  " << nft.token_id.substr(0, 20) << "...  owner "
                << nft.current_owner.substr(0, 12) << "...\n";
    }
  }
  return 0;
}

int cmd_node_run(const std::string& config_path, const std::string& bind,
                 const std::string& tls_cert, const std::string& tls_key, int difficulty) {
  auto pos = bind.rfind(':');
  if (pos == std::string::npos) {
    std::cerr << "error: --bind must be HOST:PORT\n";
    return 2;
  }
  autonom::ApiConfig api;
  api.bind_address = bind.substr(0, pos);
  api.port = std::stoi(bind.substr(pos + 1));
  api.tls_cert_path = tls_cert;
  api.tls_key_path = tls_key;

  autonom::NodeConfig config = autonom::NodeConfig::from_json(read_json_file(config_path));
  autonom::TrainConfig train_cfg;
  autonom::Model bootstrap =
      autonom::train(autonom::synth_dataset(train_cfg.seed, 200, 6.0), train_cfg);
  autonom::Node node(config, autonom::Chain(difficulty), bootstrap);

  autonom::ApiServer server(node, api);
  server.start();
  std::cout << "node " << node.node_id() << " listening on "
            << (tls_cert.empty() ? "http" : "https") << "://" << api.bind_address << ":"
            << server.port() << "\n"
            << "address " << node.address().substr(0, 20) << "...\n";

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop.load() && server.running()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  server.stop();
  return 0;
}

int cmd_sim_run(const std::string& config_path, const std::string& out_path, bool text) {
  autonom::ScenarioConfig config;
  if (!config_path.empty()) {
    config = autonom::ScenarioConfig::from_json(read_json_file(config_path));
  }
  autonom::ScenarioReport report = autonom::run_scenario(config);
  if (!out_path.empty()) {
    write_text_file(out_path, report.document.dump(2) + "\n");
    if (text) std::cout << report.to_text();
  } else {
    std::cout << (text ? report.to_text() : report.document.dump(2) + "\n");
  }
  if (!report.ok) {
    for (const auto& f : report.document.at("invariantFailures")) {
      std::cerr << "invariant failure: " << f.get<std::string>() << "\n";
    }
    return 1;
  }
  return 0;
}

int cmd_classify_train(const std::string& csv, const std::string& model_path,
                       const autonom::TrainConfig& cfg) {
  auto records = autonom::load_csv(std::filesystem::path(csv));
  autonom::Model model = autonom::train(records, cfg);
  autonom::save_model(model_path, model);
  autonom::Metrics m = autonom::evaluate(model, records);
  std::cout << "trained on " << records.size() << " records, training accuracy "
            << m.accuracy << "\n"
            << "model written to " << model_path << "\n";
  return 0;
}

int cmd_classify_eval(const std::string& csv, const std::string& model_path) {
  auto records = autonom::load_csv(std::filesystem::path(csv));
  autonom::Model model = autonom::load_model(model_path);
  autonom::Metrics m = autonom::evaluate(model, records);
  std::cout << "n " << records.size() << "\naccuracy " << m.accuracy << "\nprecision "
            << (m.precision_defined ? std::to_string(m.precision) : "undefined")
            << "\nrecall " << m.recall << "\nf1 " << m.f1 << "\nconfusion tp " << m.tp
            << " fp " << m.fp << " tn " << m.tn << " fn " << m.fn << "\n";
  return 0;
}

int cmd_classify_synth(const std::string& out, std::size_t count, std::uint64_t seed,
                       double separation) {
  auto records = autonom::synth_dataset(seed, count, separation);
  autonom::save_csv(std::filesystem::path(out), records);
  std::cout << "wrote " << records.size() << " labeled flows to " << out << "\n";
  return 0;
}

int cmd_perf_mttr(double lambda, double mu, double work, double hashrate) {
  autonom::MttrBreakdown b = autonom::mttr({lambda, mu}, work, hashrate);
  std::cout << "waiting " << b.waiting << "\nblock " << b.block << "\nmttr " << b.total
            << "\n";
  return 0;
}

int cmd_perf_sweep(int d_min, int d_max, int trials, std::uint64_t seed,
                   const std::string& out_path) {
  auto rows = autonom::difficulty_sweep(d_min, d_max, trials, seed);
  if (out_path.empty()) {
    autonom::write_sweep_csv(std::cout, rows);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    autonom::write_sweep_csv(out, rows);
    std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autonomous blockchain-backed intrusion detection toolkit"};
  app.require_subcommand(1);

  // wallet
  auto* wallet = app.add_subcommand("wallet", "key management");
  wallet->require_subcommand(1);
  auto* wallet_new = wallet->add_subcommand("new", "generate a secp256k1 keypair");
  std::string wallet_seed;
  wallet_new->add_option("--seed", wallet_seed, "hex seed for a deterministic keypair");

  // chain
  auto* chain = app.add_subcommand("chain", "chain file inspection");
  chain->require_subcommand(1);
  auto* chain_validate = chain->add_subcommand("validate", "full tamper check");
  std::string chain_file;
  chain_validate->add_option("file", chain_file, "chain JSON file")->required();
  auto* chain_show = chain->add_subcommand("show", "blocks, transactions, tokens");
  std::string show_file;
  chain_show->add_option("file", show_file, "chain JSON file")->required();

  // node
  auto* node = app.add_subcommand("node", "run a node");
  node->require_subcommand(1);
  auto* node_run = node->add_subcommand("run", "serve the REST API over one node");
  std::string node_config, node_bind = "127.0.0.1:8080", tls_cert, tls_key;
  int node_difficulty = 2;
  node_run->add_option("--config", node_config, "node config JSON")->required();
  node_run->add_option("--bind", node_bind, "HOST:PORT, port 0 for ephemeral");
  node_run->add_option("--tls-cert", tls_cert, "PEM certificate, enables HTTPS");
  node_run->add_option("--tls-key", tls_key, "PEM private key");
  node_run->add_option("--difficulty", node_difficulty, "chain difficulty");

  // sim
  auto* sim = app.add_subcommand("sim", "deterministic multi-node scenario");
  sim->require_subcommand(1);
  auto* sim_run = sim->add_subcommand("run", "inject traffic, mint, transfer, converge");
  std::string sim_config, sim_out;
  bool sim_text = false;
  sim_run->add_option("--config", sim_config, "scenario config JSON, defaults when omitted");
  sim_run->add_option("--out", sim_out, "write the JSON report here");
  sim_run->add_flag("--text", sim_text, "human-readable summary");

  // classify
  auto* classify = app.add_subcommand("classify", "flow classifier");
  classify->require_subcommand(1);
  auto* ctrain = classify->add_subcommand("train", "fit the linear SVM on a CSV");
  std::string train_csv, train_model;
  autonom::TrainConfig train_cfg;
  ctrain->add_option("--csv", train_csv, "labeled flow CSV")->required();
  ctrain->add_option("--model", train_model, "output model JSON")->required();
  ctrain->add_option("--lambda", train_cfg.lambda, "regularization");
  ctrain->add_option("--epochs", train_cfg.epochs, "passes over the data");
  ctrain->add_option("--seed", train_cfg.seed, "shuffle seed");
  auto* ceval = classify->add_subcommand("eval", "score a model on a CSV");
  std::string eval_csv, eval_model;
  ceval->add_option("--csv", eval_csv, "labeled flow CSV")->required();
  ceval->add_option("--model", eval_model, "model JSON")->required();
  auto* csynth = classify->add_subcommand("synth", "write a synthetic labeled CSV");
  std::string synth_out;
  std::size_t synth_count = 1000;
  std::uint64_t synth_seed = 7;
  double synth_sep = 6.0;
  csynth->add_option("--out", synth_out, "output CSV")->required();
  csynth->add_option("--count", synth_count, "rows");
  csynth->add_option("--seed", synth_seed, "generator seed");
  csynth->add_option("--separation", synth_sep, "cluster distance in sigma units");

  // perf
  auto* perf = app.add_subcommand("perf", "queueing and mining models");
  perf->require_subcommand(1);
  auto* pmttr = perf->add_subcommand("mttr", "mean time to respond breakdown");
  double p_lambda = 0, p_mu = 0, p_work = 0, p_hash = 0;
  pmttr->add_option("--lambda", p_lambda, "arrival rate")->required();
  pmttr->add_option("--mu", p_mu, "service rate")->required();
  pmttr->add_option("--difficulty-d", p_work, "difficulty in expected-work units")
      ->required();
  pmttr->add_option("--hashrate", p_hash, "hashes per second")->required();
  auto* psweep = perf->add_subcommand("sweep", "mean attempts per hex-digit difficulty");
  int sweep_dmin = 1, sweep_dmax = 3, sweep_trials = 100;
  std::uint64_t sweep_seed = 42;
  std::string sweep_out;
  psweep->add_option("--d-min", sweep_dmin, "lowest difficulty");
  psweep->add_option("--d-max", sweep_dmax, "highest difficulty");
  psweep->add_option("--trials", sweep_trials, "blocks mined per difficulty");
  psweep->add_option("--seed", sweep_seed, "parent hash seed");
  psweep->add_option("--out", sweep_out, "output CSV, stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (wallet_new->parsed()) return cmd_wallet_new(wallet_seed);
    if (chain_validate->parsed()) return cmd_chain_validate(chain_file);
    if (chain_show->parsed()) return cmd_chain_show(show_file);
    if (node_run->parsed()) {
      return cmd_node_run(node_config, node_bind, tls_cert, tls_key, node_difficulty);
    }
    if (sim_run->parsed()) return cmd_sim_run(sim_config, sim_out, sim_text);
    if (ctrain->parsed()) return cmd_classify_train(train_csv, train_model, train_cfg);
    if (ceval->parsed()) return cmd_classify_eval(eval_csv, eval_model);
    if (csynth->parsed()) return cmd_classify_synth(synth_out, synth_count, synth_seed, synth_sep);
    if (pmttr->parsed()) return cmd_perf_mttr(p_lambda, p_mu, p_work, p_hash);
    if (psweep->parsed()) {
      return cmd_perf_sweep(sweep_dmin, sweep_dmax, sweep_trials, sweep_seed, sweep_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
