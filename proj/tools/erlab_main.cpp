// erlab: synthetic-world laboratory for posterior-guided, efficiency-aware
// policy training, with an exact enumeration oracle and evaluation tools.
//
// Subcommands: train, verify, ablate, metrics e3, analyze-keywords.
// Exit codes: 0 success, 2 config error, 3 numeric error, 4 capacity error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "erlab/config.hpp"
#include "erlab/errors.hpp"
#include "erlab/metrics.hpp"
#include "erlab/oracle.hpp"
#include "erlab/trainer.hpp"
#include "erlab/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCapacity = 4;

std::string now_utc_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw erlab::ConfigError("cannot open file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// write-temp-then-rename so partially written artifacts never appear
void atomic_write(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw erlab::ConfigError("cannot write file: " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

fs::path resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("ERLAB_OUT_DIR"); env != nullptr && env[0] != '\0') {
        return env;
    }
    return "erlab-out";
}

struct ManifestBuilder {
    json doc;

    explicit ManifestBuilder(std::uint64_t seed) {
        doc["tool"] = erlab::kToolName;
        doc["tool_version"] = erlab::kToolVersion;
        doc["seed"] = seed;
        doc["started_at"] = now_utc_iso8601();
        doc["artifacts"] = json::object();
    }

    void add_artifact(const std::string& name, const fs::path& path) {
        doc["artifacts"][name] = path.string();
    }

    void write(const fs::path& out_dir) {
        doc["finished_at"] = now_utc_iso8601();
        atomic_write(out_dir / "manifest.json", doc.dump(2) + "\n");
    }
};

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// ---------------------------------------------------------------------------
// train

struct TrainCli {
    std::string config_path = "default";
    std::string out_dir;
    bool print_json = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> iterations;
};

erlab::TrainConfig resolve_train_config(const TrainCli& cli) {
    erlab::TrainConfig config = cli.config_path == "default"
                                    ? erlab::default_train_config()
                                    : erlab::load_train_config_file(cli.config_path);
    if (cli.seed) config.seed = *cli.seed;
    if (cli.iterations) config.iterations = *cli.iterations;
    config.validate();
    return config;
}

json summarize_training(const erlab::TrainConfig& config, const erlab::TrainingLog& log) {
    json doc;
    doc["tool_version"] = erlab::kToolVersion;
    doc["seed"] = config.seed;
    doc["config_text"] = erlab::serialize_train_config(config);
    doc["iterations_completed"] = log.rows.size();
    doc["aborted_non_finite"] = log.aborted_non_finite;
    if (log.aborted_non_finite) doc["aborted_at_iteration"] = log.aborted_at_iteration;
    if (!log.rows.empty()) {
        const auto& first = log.rows.front().stats;
        const auto& last = log.rows.back().stats;
        doc["initial"] = {{"prior_len_mean", first.prior_len_mean},
                          {"post_len_mean", first.post_len_mean},
                          {"prior_acc", first.prior_acc},
                          {"post_acc", first.post_acc}};
        doc["final"] = {{"prior_len_mean", last.prior_len_mean},
                        {"post_len_mean", last.post_len_mean},
                        {"prior_acc", last.prior_acc},
                        {"post_acc", last.post_acc},
                        {"gated_frac", last.gated_frac},
                        {"s_hat_mean", last.s_hat_mean}};
    }
    doc["evals"] = json::array();
    for (const erlab::EvalPoint& point : log.evals) {
        doc["evals"].push_back({{"iteration", point.iteration},
                                {"prior_acc", point.prior_acc},
                                {"prior_len", point.prior_len},
                                {"post_acc", point.post_acc},
                                {"post_len", point.post_len}});
    }
    return doc;
}

int cmd_train(const TrainCli& cli) {
    const erlab::TrainConfig config = resolve_train_config(cli);
    const fs::path out_dir = resolve_out_dir(cli.out_dir);
    fs::create_directories(out_dir);

    ManifestBuilder manifest(config.seed);
    manifest.doc["command"] = "train";
    manifest.doc["config_text"] = erlab::serialize_train_config(config);

    const erlab::TrainingLog log = erlab::run_training(config);

    const fs::path csv_path = out_dir / "training_log.csv";
    const fs::path params_path = out_dir / "params.json";
    const fs::path summary_path = out_dir / "summary.json";
    const fs::path config_path = out_dir / "config.toml";
    atomic_write(csv_path, erlab::training_log_to_csv(log));
    atomic_write(params_path, erlab::params_to_json(log.final_params));
    const json summary = summarize_training(config, log);
    atomic_write(summary_path, summary.dump(2) + "\n");
    atomic_write(config_path, erlab::serialize_train_config(config));

    manifest.add_artifact("training_log_csv", csv_path);
    manifest.add_artifact("params_json", params_path);
    manifest.add_artifact("summary_json", summary_path);
    manifest.add_artifact("config_toml", config_path);
    manifest.write(out_dir);

    if (cli.print_json) {
        std::cout << summary.dump(2) << "\n";
    } else if (!log.rows.empty()) {
        const auto& first = log.rows.front().stats;
        const auto& last = log.rows.back().stats;
        std::cout << "train: " << log.rows.size() << " iterations, prior length "
                  << format_fixed(first.prior_len_mean, 3) << " -> "
                  << format_fixed(last.prior_len_mean, 3) << ", prior acc "
                  << format_fixed(first.prior_acc, 3) << " -> "
                  << format_fixed(last.prior_acc, 3) << "\n";
        std::cout << "artifacts in " << out_dir.string() << "\n";
    }
    if (log.aborted_non_finite) {
        std::cerr << "train aborted: non-finite loss at iteration " << log.aborted_at_iteration
                  << " (partial log written)\n";
        return kExitNumeric;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyCli {
    std::string out_dir;
    bool print_json = false;
    std::uint64_t seed = 7;
    int worlds = 100;
    std::uint64_t cap = erlab::kDefaultEnumerationCap;
};

struct CheckOutcome {
    std::string name;
    bool pass = true;
    double worst = 0.0;
    std::string note;

    explicit CheckOutcome(std::string check_name) : name(std::move(check_name)) {}
};

int cmd_verify(const VerifyCli& cli) {
    const fs::path out_dir = resolve_out_dir(cli.out_dir);
    fs::create_directories(out_dir);

    const erlab::WorldConfig world = erlab::default_world();
    const erlab::HyperParams hp;

    CheckOutcome normalization{"pi_normalization"};
    CheckOutcome qtheta_normalization{"qtheta_normalization"};
    CheckOutcome bayes{"bayes_consistency"};
    CheckOutcome variance{"variance_identity"};
    CheckOutcome prop1_identity{"prop1_identity"};
    CheckOutcome prop1_implication{"prop1_implication"};
    CheckOutcome jensen_true{"jensen_true_posterior"};
    CheckOutcome jensen_qtheta{"jensen_qtheta"};
    CheckOutcome accuracy_advantage{"accuracy_advantage"};
    CheckOutcome kl_nonneg{"kl_nonnegative"};
    CheckOutcome boundary{"boundary_counterexample"};

    int negative_cov_worlds = 0;
    std::string first_table_csv;
    std::string first_scalars_json;

    for (int i = 0; i < cli.worlds; ++i) {
        const std::uint64_t task_seed = erlab::derive_stream_seed(
            cli.seed, static_cast<std::uint64_t>(i), erlab::StreamTag::Verify, 0);
        const erlab::Task task = erlab::generate_task(task_seed, world);
        erlab::Rng rng(erlab::derive_stream_seed(cli.seed, static_cast<std::uint64_t>(i),
                                                 erlab::StreamTag::Verify, 1));
        erlab::PolicyParams params = erlab::PolicyParams::zeros(world);
        for (double& w : params.weights) w = rng.next_range(-2.0, 2.0);

        const erlab::EnumerationReport report =
            erlab::enumerate_world(params, task, hp, cli.cap);
        if (i == 0) {
            first_table_csv = erlab::report_table_to_csv(report);
            first_scalars_json = erlab::report_scalars_to_json(report);
        }

        double pi_total = 0.0;
        double qtheta_total = 0.0;
        for (const erlab::TrajectoryRow& row : report.rows) {
            pi_total += row.pi;
            qtheta_total += row.q_theta;
            bayes.worst = std::max(
                bayes.worst,
                std::abs(row.q_true * report.marginal - row.pi * row.likelihood));
        }
        normalization.worst = std::max(normalization.worst, std::abs(pi_total - 1.0));
        qtheta_normalization.worst =
            std::max(qtheta_normalization.worst, std::abs(qtheta_total - 1.0));

        variance.worst = std::max(variance.worst, erlab::check_variance_identity(report));

        const erlab::Proposition1Check prop1 = erlab::check_proposition1(report);
        prop1_identity.worst = std::max(prop1_identity.worst, prop1.identity_residual);
        if (!prop1.cov_nonnegative) ++negative_cov_worlds;
        if (!prop1.implication_holds) prop1_implication.pass = false;

        jensen_true.worst =
            std::max(jensen_true.worst, report.elbo_true_posterior - report.log_J);
        jensen_qtheta.worst = std::max(jensen_qtheta.worst, report.elbo_q_theta - report.log_J);
        accuracy_advantage.worst =
            std::min(accuracy_advantage.worst, report.e_q_L - report.e_pi_L);
        kl_nonneg.worst = std::min(kl_nonneg.worst, report.kl_qtrue_pi);
        kl_nonneg.worst = std::min(kl_nonneg.worst, report.kl_qtheta_pi);
    }

    normalization.pass = normalization.worst <= 1e-10;
    qtheta_normalization.pass = qtheta_normalization.worst <= 1e-10;
    bayes.pass = bayes.worst <= 1e-14;
    variance.pass = variance.worst <= 1e-12;
    prop1_identity.pass = prop1_identity.worst <= 1e-12;
    prop1_implication.note =
        "negative-cov boundary worlds: " + std::to_string(negative_cov_worlds);
    jensen_true.pass = jensen_true.worst <= 1e-12;
    jensen_qtheta.pass = jensen_qtheta.worst <= 1e-12;
    accuracy_advantage.pass = accuracy_advantage.worst >= -1e-12;
    kl_nonneg.pass = kl_nonneg.worst >= -1e-12;

    erlab::HyperParams boundary_hp;
    boundary_hp.alpha = 1.0;
    const erlab::NegativeCovarianceInstance instance =
        erlab::construct_negative_covariance_instance(boundary_hp);
    const erlab::EnumerationReport boundary_report =
        erlab::enumerate_world(instance.params, instance.task, boundary_hp, cli.cap);
    const erlab::Proposition1Check boundary_check =
        erlab::check_proposition1(boundary_report);
    boundary.pass = boundary_check.cov < 0.0 && boundary_check.gap < 0.0 &&
                    boundary_check.identity_residual <= 1e-12;
    boundary.worst = boundary_check.cov;
    boundary.note = "cov=" + std::to_string(boundary_check.cov) +
                    " gap=" + std::to_string(boundary_check.gap);

    const std::vector<CheckOutcome> checks{
        normalization, qtheta_normalization, bayes,       variance,
        prop1_identity, prop1_implication,   jensen_true, jensen_qtheta,
        accuracy_advantage, kl_nonneg,       boundary};

    bool all_pass = true;
    json check_list = json::array();
    for (const CheckOutcome& check : checks) {
        all_pass = all_pass && check.pass;
        std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name
                  << "  worst=" << check.worst;
        if (!check.note.empty()) std::cout << "  (" << check.note << ")";
        std::cout << "\n";
        json entry{{"name", check.name}, {"pass", check.pass}, {"worst", check.worst}};
        if (!check.note.empty()) entry["note"] = check.note;
        check_list.push_back(entry);
    }

    json doc;
    doc["tool_version"] = erlab::kToolVersion;
    doc["seed"] = cli.seed;
    doc["worlds"] = cli.worlds;
    doc["all_pass"] = all_pass;
    doc["checks"] = check_list;

    ManifestBuilder manifest(cli.seed);
    manifest.doc["command"] = "verify";
    manifest.doc["worlds"] = cli.worlds;
    manifest.doc["enumeration_cap"] = cli.cap;
    const fs::path report_path = out_dir / "verify_report.json";
    const fs::path table_path = out_dir / "trajectory_table.csv";
    const fs::path scalars_path = out_dir / "enumeration_report.json";
    atomic_write(report_path, doc.dump(2) + "\n");
    atomic_write(table_path, first_table_csv);
    atomic_write(scalars_path, first_scalars_json);
    manifest.add_artifact("verify_report_json", report_path);
    manifest.add_artifact("trajectory_table_csv", table_path);
    manifest.add_artifact("enumeration_report_json", scalars_path);
    manifest.write(out_dir);

    if (cli.print_json) std::cout << doc.dump(2) << "\n";
    return all_pass ? kExitOk : 1;
}

// ---------------------------------------------------------------------------
// ablate

struct AblateCli {
    std::string config_path = "default";
    std::string out_dir;
    bool print_json = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> iterations;
    int seeds = 5;
};

struct AblationVariant {
    std::string name;
    bool disable_distill = false;
    bool disable_efficiency = false;
    std::optional<double> alpha;
};

int cmd_ablate(const AblateCli& cli) {
    erlab::TrainConfig base = cli.config_path == "default"
                                  ? erlab::default_train_config()
                                  : erlab::load_train_config_file(cli.config_path);
    if (cli.seed) base.seed = *cli.seed;
    if (cli.iterations) base.iterations = *cli.iterations;
    base.validate();
    const fs::path out_dir = resolve_out_dir(cli.out_dir);
    fs::create_directories(out_dir);

    const std::vector<AblationVariant> variants{
        {"full", false, false, std::nullopt},
        {"beta_0", true, false, std::nullopt},
        {"alpha_0", false, true, std::nullopt},
        {"alpha_0.25", false, false, 0.25},
        {"alpha_0.5", false, false, 0.5},
        {"alpha_1.0", false, false, 1.0},
        {"alpha_2.0", false, false, 2.0},
    };

    std::string csv =
        "variant,seed,final_prior_len,final_prior_acc,final_post_len,final_post_acc,"
        "final_gated_frac\n";
    json doc;
    doc["tool_version"] = erlab::kToolVersion;
    doc["base_seed"] = base.seed;
    doc["seeds_per_variant"] = cli.seeds;
    doc["iterations"] = base.iterations;
    doc["variants"] = json::array();

    for (const AblationVariant& variant : variants) {
        json runs = json::array();
        double mean_final_prior_len = 0.0;
        for (int s = 0; s < cli.seeds; ++s) {
            erlab::TrainConfig config = base;
            config.seed = base.seed + static_cast<std::uint64_t>(s);
            config.disable_distill = variant.disable_distill;
            config.disable_efficiency = variant.disable_efficiency;
            if (variant.alpha) config.hp.alpha = *variant.alpha;
            const erlab::TrainingLog log = erlab::run_training(config);
            if (log.rows.empty()) throw erlab::NumericError("ablate: empty training log");
            const erlab::StepStats& last = log.rows.back().stats;
            char line[256];
            std::snprintf(line, sizeof line, "%s,%llu,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                          variant.name.c_str(),
                          static_cast<unsigned long long>(config.seed), last.prior_len_mean,
                          last.prior_acc, last.post_len_mean, last.post_acc, last.gated_frac);
            csv += line;
            runs.push_back({{"seed", config.seed},
                            {"final_prior_len", last.prior_len_mean},
                            {"final_prior_acc", last.prior_acc},
                            {"final_post_len", last.post_len_mean},
                            {"final_post_acc", last.post_acc}});
            mean_final_prior_len += last.prior_len_mean;
        }
        mean_final_prior_len /= cli.seeds;
        doc["variants"].push_back({{"name", variant.name},
                                   {"mean_final_prior_len", mean_final_prior_len},
                                   {"runs", runs}});
        std::cout << variant.name << ": mean final prior length "
                  << format_fixed(mean_final_prior_len, 4) << "\n";
    }

    ManifestBuilder manifest(base.seed);
    manifest.doc["command"] = "ablate";
    manifest.doc["config_text"] = erlab::serialize_train_config(base);
    manifest.doc["seeds_per_variant"] = cli.seeds;
    const fs::path csv_path = out_dir / "ablation_summary.csv";
    const fs::path json_path = out_dir / "ablation_summary.json";
    atomic_write(csv_path, csv);
    atomic_write(json_path, doc.dump(2) + "\n");
    manifest.add_artifact("ablation_summary_csv", csv_path);
    manifest.add_artifact("ablation_summary_json", json_path);
    manifest.write(out_dir);

    if (cli.print_json) std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// metrics e3

int cmd_metrics_e3(const std::string& in_file, bool print_json, const std::string& out_dir_flag) {
    const erlab::EvalReport report = erlab::eval_report(erlab::parse_eval_csv(read_file(in_file)));

    json doc;
    doc["rows"] = json::array();
    for (const erlab::EvalRecord& row : report.rows) {
        doc["rows"].push_back({{"name", row.name},
                               {"acc", row.acc_percent},
                               {"avg_tokens", row.avg_tokens},
                               {"epsilon3", row.epsilon3}});
    }
    doc["average"] = {{"acc", report.avg_acc},
                      {"avg_tokens", report.avg_tokens},
                      {"epsilon3_mean_of_rows", report.avg_epsilon3_mean_of_rows},
                      {"epsilon3_of_means", report.avg_epsilon3_of_means}};

    if (!out_dir_flag.empty()) {
        const fs::path out_dir = resolve_out_dir(out_dir_flag);
        fs::create_directories(out_dir);
        atomic_write(out_dir / "metrics_report.json", doc.dump(2) + "\n");
    }

    if (print_json) {
        std::cout << doc.dump(2) << "\n";
        return kExitOk;
    }
    std::printf("%-12s %10s %12s %8s\n", "name", "acc", "avg_tokens", "e3");
    for (const erlab::EvalRecord& row : report.rows) {
        std::printf("%-12s %10.2f %12.2f %8.2f\n", row.name.c_str(), row.acc_percent,
                    row.avg_tokens, row.epsilon3);
    }
    std::printf("%-12s %10.2f %12.2f %8.2f  (mean of per-row e3; e3 of means = %.2f)\n",
                "Average", report.avg_acc, report.avg_tokens,
                report.avg_epsilon3_mean_of_rows, report.avg_epsilon3_of_means);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze-keywords

int cmd_analyze_keywords(const std::vector<std::string>& files, const std::string& dict_file,
                         bool print_json, const std::string& out_dir_flag) {
    const erlab::KeywordDictionary dict =
        dict_file.empty() ? erlab::default_keyword_dictionary()
                          : erlab::parse_keyword_dictionary(read_file(dict_file));

    json doc = json::array();
    for (const std::string& file : files) {
        const erlab::KeywordScan scan = erlab::keyword_scan(read_file(file), dict);
        json entry;
        entry["file"] = file;
        entry["total_tokens"] = scan.total_tokens;
        entry["categories"] = json::array();
        for (const erlab::CategoryCount& cc : scan.categories) {
            entry["categories"].push_back({{"category", cc.category},
                                           {"count", cc.count},
                                           {"per_1000_tokens", cc.per_thousand_tokens}});
        }
        doc.push_back(entry);
        if (!print_json) {
            std::printf("%s (%ld tokens)\n", file.c_str(), scan.total_tokens);
            for (const erlab::CategoryCount& cc : scan.categories) {
                std::printf("  %-24s %6ld  %8.3f per 1000 tokens\n", cc.category.c_str(),
                            cc.count, cc.per_thousand_tokens);
            }
        }
    }
    if (!out_dir_flag.empty()) {
        const fs::path out_dir = resolve_out_dir(out_dir_flag);
        fs::create_directories(out_dir);
        atomic_write(out_dir / "keyword_report.json", doc.dump(2) + "\n");
    }
    if (print_json) std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(erlab::kToolName) + " " + erlab::kToolVersion +
                 " - enumerable-world lab for efficiency-aware posterior-guided training"};
    app.require_subcommand(1);

    TrainCli train_cli;
    CLI::App* train = app.add_subcommand("train", "Run the training loop");
    train->add_option("--config", train_cli.config_path,
                      "Config file path, or 'default' for built-in defaults");
    train->add_option("--seed", train_cli.seed, "Override the config seed");
    train->add_option("--iterations", train_cli.iterations, "Override iteration count");
    train->add_option("--out-dir", train_cli.out_dir, "Artifact directory");
    train->add_flag("--json", train_cli.print_json, "Print the summary JSON to stdout");

    VerifyCli verify_cli;
    CLI::App* verify = app.add_subcommand(
        "verify", "Enumerate random worlds and check the exact identities");
    verify->add_option("--seed", verify_cli.seed, "World generation seed");
    verify->add_option("--worlds", verify_cli.worlds, "Number of random worlds")
        ->check(CLI::PositiveNumber);
    verify->add_option("--cap", verify_cli.cap, "Enumeration size cap");
    verify->add_option("--out-dir", verify_cli.out_dir, "Artifact directory");
    verify->add_flag("--json", verify_cli.print_json, "Print the report JSON to stdout");

    AblateCli ablate_cli;
    CLI::App* ablate =
        app.add_subcommand("ablate", "Run the ablation grid over several seeds");
    ablate->add_option("--config", ablate_cli.config_path, "Base config file or 'default'");
    ablate->add_option("--seed", ablate_cli.seed, "Override the base seed");
    ablate->add_option("--iterations", ablate_cli.iterations, "Override iteration count");
    ablate->add_option("--seeds", ablate_cli.seeds, "Seeds per variant")
        ->check(CLI::PositiveNumber);
    ablate->add_option("--out-dir", ablate_cli.out_dir, "Artifact directory");
    ablate->add_flag("--json", ablate_cli.print_json, "Print the summary JSON to stdout");

    std::string metrics_in;
    std::string metrics_out_dir;
    bool metrics_json = false;
    std::uint64_t metrics_seed = 0;
    CLI::App* metrics = app.add_subcommand("metrics", "Evaluation metric utilities");
    metrics->require_subcommand(1);
    CLI::App* e3 = metrics->add_subcommand("e3", "Compute acc^2/tokens over a CSV");
    e3->add_option("--in", metrics_in, "CSV with header name,acc,avg_tokens")->required();
    e3->add_option("--seed", metrics_seed, "Accepted for interface uniformity; unused");
    e3->add_option("--out-dir", metrics_out_dir, "Also write metrics_report.json here");
    e3->add_flag("--json", metrics_json, "Print JSON instead of the table");

    std::vector<std::string> keyword_files;
    std::string keyword_dict;
    std::string keyword_out_dir;
    bool keyword_json = false;
    std::uint64_t keyword_seed = 0;
    CLI::App* keywords = app.add_subcommand(
        "analyze-keywords", "Count taxonomy phrases per thousand whitespace tokens");
    keywords->add_option("files", keyword_files, "Transcript text files")->required();
    keywords->add_option("--dict", keyword_dict,
                         "Dictionary override file ('Category:' line, one phrase per line)");
    keywords->add_option("--seed", keyword_seed, "Accepted for interface uniformity; unused");
    keywords->add_option("--out-dir", keyword_out_dir, "Also write keyword_report.json here");
    keywords->add_flag("--json", keyword_json, "Print JSON instead of tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // exits 0 with help text
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*train) return cmd_train(train_cli);
        if (*verify) return cmd_verify(verify_cli);
        if (*ablate) return cmd_ablate(ablate_cli);
        if (*metrics) return cmd_metrics_e3(metrics_in, metrics_json, metrics_out_dir);
        if (*keywords) {
            return cmd_analyze_keywords(keyword_files, keyword_dict, keyword_json,
                                        keyword_out_dir);
        }
    } catch (const erlab::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const erlab::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const erlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitConfig;
}
