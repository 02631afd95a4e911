// Command-line front end: data generation, training, explanation
// precomputation, the study server, simulation, evaluation and planning.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "xaistudy/card/card.hpp"
#include "xaistudy/common/error.hpp"
#include "xaistudy/evaluation/report.hpp"
#include "xaistudy/explainers/precompute.hpp"
#include "xaistudy/models/checkpoint.hpp"
#include "xaistudy/models/training.hpp"
#include "xaistudy/power/cost.hpp"
#include "xaistudy/power/power.hpp"
#include "xaistudy/sim/simulator.hpp"
#include "xaistudy/study/http.hpp"
#include "xaistudy/tabular/sampling.hpp"
#include "xaistudy/tabular/synthetic.hpp"

namespace fs = std::filesystem;
using namespace xaistudy;

namespace {

struct Endpoint {
  std::string server;  // host:port
  std::string store = "file:study-store";
};

void add_endpoint(CLI::App* cmd, Endpoint& e) {
  cmd->add_option("--server", e.server, "Running server as host:port");
  cmd->add_option("--store", e.store, "Store used in-process when --server is absent")->capture_default_str();
}

// Either an HTTP client for a running server or an in-process service.
struct Connection {
  SystemClock clock;
  std::unique_ptr<study::StudyService> service;
  std::unique_ptr<study::ApiRouter> router;
  std::string host;
  int port = 0;

  explicit Connection(const Endpoint& e) {
    if (!e.server.empty()) {
      const auto colon = e.server.rfind(':');
      if (colon == std::string::npos) throw ValidationError("--server expects host:port");
      host = e.server.substr(0, colon);
      port = std::stoi(e.server.substr(colon + 1));
    } else {
      service = std::make_unique<study::StudyService>(study::open_store(e.store), clock);
      router = std::make_unique<study::ApiRouter>(*service);
    }
  }

  std::unique_ptr<study::ApiClient> client() const {
    if (router) return std::make_unique<study::InProcessClient>(*router);
    return std::make_unique<study::HttpClient>(host, port);
  }
};

Json checked(const study::ApiResponse& r) {
  if (r.status >= 400) throw Error("api", "server answered " + std::to_string(r.status) + ": " + r.body);
  return r.json();
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else write_text_file(path, text);
}

std::vector<double> default_weights(std::size_t p, std::size_t q) {
  std::vector<double> w;
  for (std::size_t i = 0; i < p; ++i) w.push_back(i % 2 == 0 ? 1.0 : -0.75);
  for (std::size_t j = 0; j < q; ++j) {
    w.push_back(0.8);
    w.push_back(0.0);
    w.push_back(-0.8);
  }
  return w;
}

study::HttpServer* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human-centered explanation study toolkit"};
  app.require_subcommand(1);

  // synth
  std::size_t synth_n = 1000, synth_p = 4, synth_q = 2;
  std::uint64_t synth_seed = 0;
  std::string synth_out = "synthetic";
  std::vector<double> synth_weights;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset and codebook");
  synth->add_option("--n", synth_n)->capture_default_str();
  synth->add_option("--numeric", synth_p)->capture_default_str();
  synth->add_option("--categorical", synth_q)->capture_default_str();
  synth->add_option("--weights", synth_weights)->delimiter(',');
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("--out-dir", synth_out)->capture_default_str();

  // train
  std::string train_data, train_codebook, train_out = "model.json", train_family = "neural";
  double train_test_fraction = 0.2;
  std::uint64_t train_split_seed = 0, train_seed = 0;
  int train_epochs = -1;
  std::vector<int> train_hidden;
  auto* train = app.add_subcommand("train", "Train a model on the train split");
  train->add_option("--data", train_data)->required();
  train->add_option("--codebook", train_codebook)->required();
  train->add_option("--family", train_family)->check(CLI::IsMember({"neural", "logistic"}))->capture_default_str();
  train->add_option("--hidden", train_hidden)->delimiter(',');
  train->add_option("--epochs", train_epochs);
  train->add_option("--test-fraction", train_test_fraction)->capture_default_str();
  train->add_option("--split-seed", train_split_seed)->capture_default_str();
  train->add_option("--seed", train_seed)->capture_default_str();
  train->add_option("--out", train_out)->capture_default_str();

  // explain
  std::string ex_model, ex_data, ex_codebook, ex_method = "kernel_shap", ex_out = "explanations.json";
  std::uint64_t ex_seed = 0;
  unsigned ex_threads = 0;
  auto* explain = app.add_subcommand("explain", "Precompute explanations for every test-split instance");
  explain->add_option("--model", ex_model)->required();
  explain->add_option("--data", ex_data)->required();
  explain->add_option("--codebook", ex_codebook)->required();
  explain->add_option("--method", ex_method)->capture_default_str();
  explain->add_option("--seed", ex_seed)->capture_default_str();
  explain->add_option("--threads", ex_threads);
  explain->add_option("--out", ex_out)->capture_default_str();

  // serve
  std::string serve_store = "file:study-store", serve_host = "127.0.0.1";
  int serve_port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the study server");
  serve->add_option("--store", serve_store)->capture_default_str();
  serve->add_option("--host", serve_host)->capture_default_str();
  serve->add_option("--port", serve_port)->capture_default_str();

  // create-study
  Endpoint create_ep;
  std::string create_config;
  auto* create = app.add_subcommand("create-study", "Create a study from a main configuration file");
  create->add_option("--config", create_config)->required();
  add_endpoint(create, create_ep);

  // simulate
  Endpoint sim_ep;
  std::string sim_study, sim_behavior, sim_data, sim_codebook, sim_attention, sim_out;
  std::size_t sim_n = 30;
  unsigned sim_concurrency = 1;
  auto* simulate = app.add_subcommand("simulate", "Run simulated participants through a study");
  simulate->add_option("--study", sim_study)->required();
  simulate->add_option("--participants", sim_n)->capture_default_str();
  simulate->add_option("--behavior", sim_behavior)->required();
  simulate->add_option("--data", sim_data, "Dataset file holding the true labels")->required();
  simulate->add_option("--codebook", sim_codebook)->required();
  simulate->add_option("--attention", sim_attention, "Attention bank holding the answer key")->required();
  simulate->add_option("--concurrency", sim_concurrency)->capture_default_str();
  simulate->add_option("--out", sim_out, "Directory for the export");
  add_endpoint(simulate, sim_ep);

  // export
  Endpoint export_ep;
  std::string export_study, export_out = "export";
  auto* exp = app.add_subcommand("export", "Write a study export (decisions, survey, exclusions)");
  exp->add_option("--study", export_study)->required();
  exp->add_option("--out", export_out)->capture_default_str();
  add_endpoint(exp, export_ep);

  // evaluate
  std::string eval_export, eval_codebook, eval_protected, eval_out;
  bool eval_clustered = false;
  auto* evaluate = app.add_subcommand("evaluate", "Compute the objective and survey metrics of an export");
  evaluate->add_option("--export", eval_export, "Export directory")->required();
  evaluate->add_option("--codebook", eval_codebook);
  evaluate->add_option("--protected", eval_protected);
  evaluate->add_option("--out", eval_out, "Report file (JSON)");
  evaluate->add_flag("--clustered", eval_clustered, "Participant-clustered standard errors");

  // power
  std::vector<double> pw_means;
  double pw_sd = 0, pw_alpha = 0.05, pw_target = 0.8, pw_f = -1;
  int pw_k = 0;
  long pw_sims = 0;
  std::uint64_t pw_seed = 0;
  auto* pw = app.add_subcommand("power", "ANOVA power analysis and required sample size");
  pw->add_option("--means", pw_means)->delimiter(',');
  pw->add_option("--sd", pw_sd, "Common sd; pooled binomial sd at the grand mean when omitted");
  pw->add_option("--f", pw_f, "Effect size, instead of --means");
  pw->add_option("--k", pw_k, "Number of groups with --f");
  pw->add_option("--alpha", pw_alpha)->capture_default_str();
  pw->add_option("--power", pw_target)->capture_default_str();
  pw->add_option("--mc-sims", pw_sims, "Cross-check with a Monte-Carlo run");
  pw->add_option("--seed", pw_seed)->capture_default_str();

  // cost
  power::CostQuery cq;
  cq.avg_task_seconds = 6;
  cq.overhead_minutes = 8;
  auto* cost = app.add_subcommand("cost", "Estimate participant payments");
  cost->add_option("--participants", cq.n_participants)->required();
  cost->add_option("--rate", cq.hourly_rate, "Hourly rate")->required();
  cost->add_option("--tasks", cq.tasks_per_participant)->capture_default_str();
  cost->add_option("--seconds", cq.avg_task_seconds, "Average seconds per task")->capture_default_str();
  cost->add_option("--overhead", cq.overhead_minutes, "Minutes outside the tasks")->capture_default_str();
  cost->add_option("--fee", cq.platform_fee_fraction, "Platform fee fraction")->capture_default_str();

  // card
  std::string card_file, card_out;
  auto* card_cmd = app.add_subcommand("card", "Evaluation card tools");
  card_cmd->require_subcommand(1);
  auto* card_validate = card_cmd->add_subcommand("validate", "Exit 0 when the card has no issues");
  card_validate->add_option("file", card_file)->required();
  auto* card_render = card_cmd->add_subcommand("render", "Render the card as a text document");
  card_render->add_option("file", card_file)->required();
  card_render->add_option("--out", card_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      if (synth_weights.empty()) synth_weights = default_weights(synth_p, synth_q);
      const auto ds = tabular::generate_synthetic(synth_n, synth_p, synth_q, synth_weights, synth_seed);
      fs::create_directories(synth_out);
      tabular::write_dataset(ds, (fs::path(synth_out) / "data.csv").string());
      tabular::save_codebook(ds.codebook, (fs::path(synth_out) / "codebook.json").string());
      std::cout << "wrote " << ds.instances.size() << " rows to " << synth_out << "\n";
    } else if (*train) {
      const auto codebook = tabular::load_codebook(train_codebook);
      auto ds = tabular::split_dataset(tabular::load_dataset(train_data, codebook), train_test_fraction,
                                       train_split_seed);
      models::ModelSpec spec =
          train_family == "logistic" ? models::ModelSpec::logistic_defaults() : models::ModelSpec::neural_defaults();
      if (!train_hidden.empty() && train_family == "neural") spec.hidden_sizes = train_hidden;
      if (train_epochs > 0) spec.epochs = train_epochs;
      spec.seed = train_seed;
      const auto model = models::train_model(ds, spec);
      models::save_checkpoint(model, train_out);
      const auto m = models::evaluate_model(model, ds, codebook);
      Json out{{"checkpoint", train_out}, {"fingerprint", model.fingerprint()}, {"accuracy", m.accuracy},
               {"f1", m.f1}};
      if (m.aaod) out["aaod"] = *m.aaod;
      if (m.eod) out["eod"] = *m.eod;
      std::cout << out.dump(2) << "\n";
    } else if (*explain) {
      const auto codebook = tabular::load_codebook(ex_codebook);
      const auto model = models::load_checkpoint(ex_model, codebook);
      const auto& rec = model.record();
      const auto ds = tabular::split_dataset(tabular::load_dataset(ex_data, codebook), rec.test_fraction,
                                             rec.split_seed);
      const auto encoder = models::model_encoder(model, codebook);
      const auto config = explainers::default_config(explainers::parse_method(ex_method), encoder, ds, ex_seed);
      std::vector<tabular::Instance> targets;
      for (const auto* inst : ds.members(tabular::Split::test)) targets.push_back(*inst);
      explainers::PrecomputeOptions opts;
      opts.threads = ex_threads ? ex_threads : std::max(1U, std::thread::hardware_concurrency());
      const auto set = explainers::precompute_pool(model, encoder, targets, config, opts);
      explainers::save_explanation_set(set, ex_out);
      std::cout << "explained " << set.records.size() << " instances, " << set.errors.size() << " errors -> "
                << ex_out << "\n";
      for (const auto& e : set.errors) std::cerr << "  " << e.instance_id << ": " << e.message << "\n";
      return set.errors.empty() ? 0 : 1;
    } else if (*serve) {
      SystemClock clock;
      study::StudyService service(study::open_store(serve_store), clock);
      study::ApiRouter router(service);
      study::HttpServer server(router);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "serving on " << serve_host << ":" << serve_port << " (store " << serve_store << ")\n"
                << std::flush;
      server.run(serve_host, serve_port);
    } else if (*create) {
      Connection conn(create_ep);
      const std::string path = fs::absolute(create_config).string();
      const Json study = checked(conn.client()->post("/studies", {{"config_path", path}}));
      std::cout << study.dump(2) << "\n";
    } else if (*simulate) {
      Connection conn(sim_ep);
      const auto codebook = tabular::load_codebook(sim_codebook);
      const auto knowledge =
          sim::knowledge_from(tabular::load_dataset(sim_data, codebook), study::load_attention_bank(sim_attention));
      sim::SimulationOptions opts;
      opts.concurrency = sim_concurrency;
      const auto summary = sim::run_simulated_study([&] { return conn.client(); }, sim_study,
                                                    sim::load_behavior(sim_behavior), sim_n, knowledge, opts);
      std::cout << "completed " << summary.completed << ", disqualified " << summary.disqualified << ", "
                << summary.exported.decisions.size() << " decision rows\n";
      if (!sim_out.empty()) evaluation::write_export_dir(summary.exported, sim_out);
    } else if (*exp) {
      Connection conn(export_ep);
      const Json doc = checked(conn.client()->get("/studies/" + export_study + "/export"));
      const auto set = evaluation::response_set_from_json(doc);
      evaluation::write_export_dir(set, export_out);
      std::cout << set.decisions.size() << " decisions, " << set.surveys.size() << " survey answers, "
                << set.exclusions.size() << " exclusions -> " << export_out << "\n";
    } else if (*evaluate) {
      const auto set = evaluation::read_export_dir(eval_export);
      std::optional<tabular::Codebook> codebook;
      if (!eval_codebook.empty()) codebook = tabular::load_codebook(eval_codebook);
      evaluation::ReportOptions opts;
      opts.errors.clustered_by_participant = eval_clustered;
      if (!eval_protected.empty()) opts.protected_attribute = eval_protected;
      const auto reports = evaluation::build_report(set, codebook ? &*codebook : nullptr, opts);
      if (!eval_out.empty()) write_json_file(eval_out, evaluation::to_json(reports));
      std::cout << evaluation::render_objective_table(reports) << "\n" << evaluation::render_likert_table(reports);
      for (const auto& r : reports)
        for (const auto& d : r.diagnostics) std::cerr << r.condition << ": " << d << "\n";
    } else if (*pw) {
      double f = pw_f;
      int k = pw_k;
      double sd = pw_sd;
      if (!pw_means.empty()) {
        if (sd <= 0) sd = power::pooled_binomial_sd(pw_means);
        f = power::cohens_f(pw_means, sd);
        k = static_cast<int>(pw_means.size());
      } else if (f < 0 || k < 2) {
        throw ValidationError("give --means, or --f with --k");
      }
      const auto n = power::required_sample_size(f, k, pw_alpha, pw_target);
      Json out{{"k_groups", k},          {"cohens_f", f},         {"alpha", pw_alpha},
               {"target_power", pw_target}, {"per_group", n.per_group}, {"total", n.total},
               {"achieved_power", n.power},
               {"reference",
                {{"german_credit", power::kReferenceSampleSizeGermanCredit},
                 {"rcdv", power::kReferenceSampleSizeRcdv},
                 {"note", "published figures with unstated variance assumptions; not a numeric target"}}}};
      if (!pw_means.empty()) out["common_sd"] = sd;
      if (n.power_below) out["power_at_n_minus_1"] = *n.power_below;
      if (pw_sims > 0) {
        if (pw_means.empty()) throw ValidationError("--mc-sims needs --means");
        const auto mc = power::monte_carlo_power(pw_means, sd, n.per_group, pw_alpha, pw_sims, pw_seed);
        out["monte_carlo"] = {{"power", mc.power}, {"se", mc.se}, {"simulations", mc.simulations}};
      }
      std::cout << out.dump(2) << "\n";
      std::printf("f = %.4f, k = %d: n = %d per group, N = %d (power %.4f)\n", f, k, n.per_group, n.total, n.power);
    } else if (*cost) {
      const auto e = power::estimate_cost(cq);
      std::cout << Json{{"query", power::to_json(cq)}, {"estimate", power::to_json(e)}}.dump(2) << "\n";
      std::printf("%ld participants x %.2f min at %.2f/h: total %.2f\n", cq.n_participants,
                  e.minutes_per_participant, cq.hourly_rate, e.total);
    } else if (*card_validate) {
      const auto issues = card::validate_card(card::load_card(card_file));
      for (const auto& i : issues) std::cout << i.item << ": " << i.message << "\n";
      if (issues.empty()) std::cout << "ok\n";
      return issues.empty() ? 0 : 1;
    } else if (*card_render) {
      write_or_print(card_out, card::render_card(card::load_card(card_file)));
    }
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
