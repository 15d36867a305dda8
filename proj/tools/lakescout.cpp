// lakescout command-line tool: profile, train, query, eval, gen, fit.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lakescout/lakescout.hpp"

namespace fs = std::filesystem;
using namespace lakescout;

namespace {

enum class LogLevel { error = 0, warn = 1, info = 2 };

struct Globals {
    std::string config_file;
    std::string profiles_dir = "profiles";
    std::string model_path = "models/pretrained.json";
    std::string quality_file;
    double strictness = QualityParams::kBalanced;
    std::optional<double> strictness_raw;
    std::uint64_t seed = 42;
    unsigned threads = detail::default_threads();
    std::string log_level = "warn";
};

Globals g;

LogLevel log_level() {
    if (g.log_level == "error") return LogLevel::error;
    if (g.log_level == "info") return LogLevel::info;
    return LogLevel::warn;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::cerr << "info: " << msg << '\n';
}

WarningSink warning_sink() {
    if (log_level() < LogLevel::warn) return nullptr;
    return warn_to_stderr;
}

IngestOptions ingest_options() {
    IngestOptions o;
    o.threads = g.threads;
    o.warn = warning_sink();
    return o;
}

QualityParams quality_params() {
    QualityParams p;
    if (!g.quality_file.empty()) p = quality_params_from_json(read_json_file(g.quality_file));
    p.strictness = g.strictness_raw ? *g.strictness_raw : g.strictness;
    p.validate();
    return p;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// "1MB", "256KiB", "1.5GB", "4096" -> bytes (binary multiples).
std::size_t parse_size(const std::string& text) {
    std::size_t pos = 0;
    double value = 0;
    try {
        value = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--size", "cannot parse size '" + text + "'");
    }
    std::string unit = text.substr(pos);
    for (auto& c : unit) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    double scale = 1;
    if (unit.empty() || unit == "B") {
        scale = 1;
    } else if (unit == "K" || unit == "KB" || unit == "KIB") {
        scale = 1024.0;
    } else if (unit == "M" || unit == "MB" || unit == "MIB") {
        scale = 1024.0 * 1024.0;
    } else if (unit == "G" || unit == "GB" || unit == "GIB") {
        scale = 1024.0 * 1024.0 * 1024.0;
    } else {
        throw CLI::ValidationError("--size", "unknown size unit '" + unit + "'");
    }
    if (!(value > 0)) throw CLI::ValidationError("--size", "size must be positive");
    return static_cast<std::size_t>(value * scale);
}

// ---------------------------------------------------------------------------
// Config file: top-level keys are global options, an object under a command
// name holds that command's options. Entries become "--key=value" arguments
// placed after the user's own, and the last occurrence of an option wins.
// ---------------------------------------------------------------------------

std::string option_name(std::string key) {
    for (auto& c : key) {
        if (c == '_') c = '-';
    }
    return "--" + key;
}

void append_config_args(const nlohmann::json& obj, std::vector<std::string>& args, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        const std::string name = option_name(key);
        if (value.is_boolean()) {
            args.push_back(name + (value.get<bool>() ? "=true" : "=false"));
        } else if (value.is_string()) {
            args.push_back(name + "=" + value.get<std::string>());
        } else if (value.is_number()) {
            args.push_back(name + "=" + value.dump());
        } else {
            throw FormatError(where + ": unsupported value for '" + key + "'");
        }
    }
}

std::vector<std::string> config_args(const std::string& path, const std::string& command, const std::vector<std::string>& commands) {
    const auto doc = read_json_file(path);
    if (!doc.is_object()) throw FormatError(path + ": config must be a JSON object");
    nlohmann::json globals = nlohmann::json::object();
    std::vector<std::string> args;
    for (const auto& [key, value] : doc.items()) {
        const bool is_command = std::find(commands.begin(), commands.end(), key) != commands.end();
        if (is_command) {
            if (!value.is_object()) throw FormatError(path + ": '" + key + "' must be an object");
            if (key == command) append_config_args(value, args, path);
        } else if (key != "config") {
            globals[key] = value;
        }
    }
    append_config_args(globals, args, path);
    return args;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct ProfileArgs {
    std::string lake;
    std::string out;
};

int cmd_profile(const ProfileArgs& a) {
    const std::string out = a.out.empty() ? g.profiles_dir : a.out;
    const auto start = std::chrono::steady_clock::now();
    const Catalog catalog = ingest_directory(a.lake, ingest_options());
    log_info("ingested " + std::to_string(catalog.datasets().size()) + " datasets");
    const auto profiles = profile_catalog(catalog, g.threads);
    const auto stats = compute_normalization_stats(profiles);
    for (const auto& old : list_profile_files(out)) fs::remove(old);
    store_profiles(profiles, out);
    store_stats(stats, out);
    const double elapsed = seconds_since(start);
    const std::size_t bytes = profile_bytes(out) + fs::file_size(fs::path(out) / kStatsFile);
    std::printf("profiled %zu columns from %zu datasets in %.3f s\n", profiles.size(), catalog.datasets().size(), elapsed);
    std::printf("profile bytes: %zu (%.4f%% of %zu lake bytes) -> %s\n", bytes,
                100.0 * static_cast<double>(bytes) / static_cast<double>(catalog.total_bytes()), catalog.total_bytes(), out.c_str());
    return 0;
}

struct TrainArgs {
    std::string lake;
    std::string out;
    std::size_t pairs = SamplingConfig{}.max_pairs;
    double negative_fraction = SamplingConfig{}.negative_fraction;
    double holdout = 0.2;
    double min_spearman = 0.8;
    RegressorConfig regressor;
};

int cmd_train(const TrainArgs& a) {
    const Catalog catalog = ingest_directory(a.lake, ingest_options());
    std::vector<ProfiledColumn> profiles = load_profiles(g.profiles_dir);
    if (profiles.empty()) throw NotFoundError("no profiles in " + g.profiles_dir + " (run 'lakescout profile' first)");
    const NormalizationStats stats = load_stats(g.profiles_dir);

    SamplingConfig sampling;
    sampling.max_pairs = a.pairs;
    sampling.negative_fraction = a.negative_fraction;
    sampling.quality = quality_params();
    sampling.seed = g.seed;
    sampling.threads = g.threads;
    const auto pairs = make_training_set(catalog, profiles, stats, sampling);
    log_info("sampled " + std::to_string(pairs.size()) + " training pairs");
    auto [train_set, held] = split_holdout(pairs, a.holdout, g.seed);
    if (held.size() < 2) throw InvalidArgument("held-out split has fewer than 2 pairs; raise --pairs or --holdout");

    RegressorConfig cfg = a.regressor;
    cfg.seed = g.seed;
    const Regressor model = train(train_set, cfg);
    const double rho = prediction_fidelity(model, held);
    const std::string out = a.out.empty() ? g.model_path : a.out;
    save_model(model, out);
    std::printf("trained on %zu pairs, held out %zu\n", train_set.size(), held.size());
    std::printf("held-out spearman: %.4f\n", rho);
    std::printf("model written to %s\n", out.c_str());
    if (rho < a.min_spearman) {
        std::cerr << "error: held-out spearman " << rho << " below --min-spearman " << a.min_spearman << '\n';
        return 1;
    }
    return 0;
}

struct QueryArgs {
    std::string dataset;
    std::string column;
    std::size_t k = 10;
    bool exact = false;
    bool json = false;
    bool include_numeric = false;
    bool same_dataset = false;
    std::string lake;
};

void print_ranking(const Ranking& ranking, const ColumnRef& query, bool exact) {
    std::printf("query %s (%s scores)\n", to_string(query).c_str(), exact ? "exact" : "predicted");
    std::printf("%5s  %-32s %-32s %10s\n", "rank", "dataset", "column", "score");
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        std::printf("%5zu  %-32s %-32s %10.6f\n", i + 1, ranking[i].candidate.dataset_id.c_str(), ranking[i].candidate.column_name.c_str(),
                    ranking[i].score);
    }
}

int cmd_query(const QueryArgs& a) {
    QuerySpec spec;
    spec.k = a.k;
    spec.textual_only = !a.include_numeric;
    spec.exclude_same_dataset = !a.same_dataset;
    Ranking ranking;
    if (a.exact) {
        if (a.lake.empty()) throw CLI::ValidationError("--exact", "needs --lake");
        const Catalog catalog = ingest_directory(a.lake, ingest_options());
        spec.query = catalog.column(a.dataset, a.column);
        ranking = rank_exact(spec, catalog, quality_params(), g.threads);
    } else {
        const auto profiles = load_profiles(g.profiles_dir);
        if (profiles.empty()) throw NotFoundError("no profiles in " + g.profiles_dir);
        const ProfileIndex index(profiles, load_stats(g.profiles_dir));
        const Regressor model = load_model(g.model_path);
        spec.query = {a.dataset, a.column};
        spec.query = index.find(spec.query).first;
        ranking = rank(spec, index, model, g.threads);
    }
    if (a.json) {
        std::cout << ranking_to_json(ranking).dump(2) << '\n';
    } else {
        print_ranking(ranking, spec.query, a.exact);
    }
    return 0;
}

struct EvalArgs {
    std::string lake;
    std::string truth;
    std::size_t kmax = 10;
    int repeats = 3;
    std::string format = "text";
    std::string profiles_out;
    bool study = false;
};

int cmd_eval(const EvalArgs& a) {
    const auto truth = read_ground_truth(a.truth);
    const Regressor model = load_model(g.model_path);
    BenchmarkOptions options;
    options.k_max = a.kmax;
    options.repeats = a.repeats;
    options.threads = g.threads;
    options.profiles_dir = a.profiles_out.empty() ? g.profiles_dir : a.profiles_out;
    options.ingest = ingest_options();
    const EvalReport report = run_benchmark(a.lake, truth, model, options);

    std::vector<MetricStudyRow> study;
    if (a.study) {
        const Catalog catalog = ingest_directory(a.lake, ingest_options());
        std::vector<ColumnRef> wanted;
        for (const auto& e : truth) {
            wanted.push_back(catalog.column(e.query.dataset_id, e.query.column_name));
            wanted.push_back(catalog.column(e.candidate.dataset_id, e.candidate.column_name));
        }
        study = metric_comparison_study(truth, ValueStore(catalog, wanted, g.threads));
    }

    if (a.format == "json") {
        auto j = report_to_json(report);
        if (a.study) {
            auto& rows = j["metric_study"];
            rows = nlohmann::ordered_json::array();
            for (const auto& r : study) {
                nlohmann::ordered_json row{{"metric", r.metric}};
                for (const auto& [k, p] : r.precision) row["p@" + std::to_string(k)] = p;
                rows.push_back(std::move(row));
            }
        }
        std::cout << j.dump(2) << '\n';
    } else if (a.format == "csv") {
        std::cout << report_to_csv(report);
    } else {
        std::cout << report_to_text(report);
        if (a.study) {
            std::printf("\nmetric comparison (share of semantic pairs in the top k):\n");
            for (const auto& r : study) {
                std::printf("  %-18s", r.metric.c_str());
                for (const auto& [k, p] : r.precision) std::printf("  P@%zu=%.3f", k, p);
                std::printf("\n");
            }
        }
    }
    return 0;
}

struct GenArgs {
    std::string out;
    std::size_t files = 10;
    std::string size = "1MB";
    std::size_t domains = SyntheticLakeConfig{}.n_domains;
    bool reference = false;
    std::optional<std::uint64_t> seed;
};

int cmd_gen(const GenArgs& a) {
    SyntheticLakeConfig cfg = a.reference ? reference_lake_config() : SyntheticLakeConfig{};
    if (!a.reference) {
        cfg.n_files = a.files;
        cfg.file_size_bytes = parse_size(a.size);
        cfg.n_domains = a.domains;
    }
    if (a.seed) cfg.seed = *a.seed;
    cfg.threads = g.threads;
    const fs::path out(a.out);
    const fs::path lake_dir = out / "lake";
    if (fs::exists(lake_dir)) {
        for (const auto& f : list_csv_files(lake_dir)) fs::remove(f);
    }
    const auto start = std::chrono::steady_clock::now();
    const SyntheticLake lake = generate_synthetic_lake(cfg, lake_dir);
    write_ground_truth(lake.truth, out / "ground_truth.csv");
    std::size_t bytes = 0;
    for (const auto b : lake.file_bytes) bytes += b;
    std::printf("wrote %zu files (%zu bytes) to %s in %.3f s\n", lake.files.size(), bytes, lake_dir.string().c_str(), seconds_since(start));
    std::printf("ground truth: %zu labelled pairs -> %s\n", lake.truth.size(), (out / "ground_truth.csv").string().c_str());
    for (const auto& p : lake.planted) {
        if (p.entry.label != JoinLabel::semantic) continue;
        log_info("planted " + to_string(p.entry.query) + " ~ " + to_string(p.entry.candidate) + ": J=" + std::to_string(p.measured_j) +
                 " K=" + std::to_string(p.measured_k));
    }
    return 0;
}

struct FitArgs {
    std::string samples;
    double grid_step = 0.01;
};

int cmd_fit(const FitArgs& a) {
    const std::string data = read_file(a.samples);
    csv::Reader reader(data);
    std::vector<std::string> header, fields;
    if (!reader.next(header)) throw FormatError(a.samples + ": empty samples file");
    std::vector<std::vector<double>> columns(header.size());
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        const std::string where = a.samples + ":" + std::to_string(reader.record_number());
        if (fields.size() != header.size()) throw FormatError(where + ": expected " + std::to_string(header.size()) + " fields");
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (fields[c].empty()) continue;
            if (!parses_as_number(fields[c])) throw FormatError(where + ": '" + fields[c] + "' is not a number");
            columns[c].push_back(std::stod(fields[c]));
        }
    }
    std::printf("%-16s %8s %8s %12s %8s\n", "variable", "mu", "sigma", "wasserstein", "n");
    for (std::size_t c = 0; c < header.size(); ++c) {
        const TruncatedNormalFit fit = fit_truncated_normal(columns[c], a.grid_step);
        std::printf("%-16s %8.4f %8.4f %12.6f %8zu\n", header[c].c_str(), fit.mu, fit.sigma, fit.distance, columns[c].size());
    }
    return 0;
}

CLI::Validator strictness_level() {
    return CLI::Validator(
        [](std::string& s) -> std::string {
            double v = 0;
            try {
                v = std::stod(s);
            } catch (const std::exception&) {
                return "not a number: " + s;
            }
            if (v == 0.0 || v == 0.25 || v == 0.5) return {};
            return "strictness must be 0, 0.25 or 0.5 (use --strictness-raw for other values)";
        },
        "{0,0.25,0.5}");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lakescout: join discovery over CSV data lakes from column profiles"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--config", g.config_file, "JSON file whose entries override flags (fallback: $LAKESCOUT_CONFIG)");
    app.add_option("--profiles", g.profiles_dir, "profile directory")->capture_default_str();
    app.add_option("--model", g.model_path, "model file")->capture_default_str();
    app.add_option("--quality-params", g.quality_file, "JSON file with mu_j, mu_k, sigma_j, sigma_k");
    app.add_option("--strictness", g.strictness, "strictness level s")->check(strictness_level())->capture_default_str();
    app.add_option("--strictness-raw", g.strictness_raw, "any non-negative strictness, bypassing the level check")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--seed", g.seed, "seed for pair sampling, the held-out split and training")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (1 = sequential)")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--log-level", g.log_level, "error, warn or info")
        ->check(CLI::IsMember({"error", "warn", "info"}))
        ->capture_default_str();

    ProfileArgs pa;
    auto* profile = app.add_subcommand("profile", "profile every column of a lake and store the profiles");
    profile->add_option("lake,--lake", pa.lake, "directory of CSV files")->required();
    profile->add_option("--out", pa.out, "output directory (default: --profiles)");

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "train the quality regressor on a profiled lake");
    train_cmd->add_option("lake,--lake", ta.lake, "directory of CSV files (already profiled)")->required();
    train_cmd->add_option("--out", ta.out, "model output path (default: --model)");
    train_cmd->add_option("--pairs", ta.pairs, "column pairs to sample")->check(CLI::PositiveNumber)->capture_default_str();
    train_cmd->add_option("--negative-fraction", ta.negative_fraction, "share of pairs without value overlap")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    train_cmd->add_option("--holdout", ta.holdout, "held-out share for the fidelity check")->check(CLI::Range(0.01, 0.9))->capture_default_str();
    train_cmd->add_option("--min-spearman", ta.min_spearman, "fail below this held-out Spearman")->capture_default_str();
    train_cmd->add_option("--trees", ta.regressor.n_trees, "boosting rounds")->capture_default_str();
    train_cmd->add_option("--learning-rate", ta.regressor.learning_rate, "shrinkage")->capture_default_str();
    train_cmd->add_option("--depth", ta.regressor.max_tree_depth, "maximum tree depth")->capture_default_str();
    train_cmd->add_option("--min-leaf", ta.regressor.min_samples_leaf, "minimum samples per leaf")->capture_default_str();
    train_cmd->add_option("--subsample", ta.regressor.subsample, "row share per tree")->capture_default_str();

    QueryArgs qa;
    auto* query = app.add_subcommand("query", "rank join candidates for a column");
    query->add_option("--dataset", qa.dataset, "query dataset id")->required();
    query->add_option("--column", qa.column, "query column name")->required();
    query->add_option("-k,--k", qa.k, "ranking length")->check(CLI::PositiveNumber)->capture_default_str();
    query->add_flag("--exact", qa.exact, "score with the exact quality from raw values (needs --lake)");
    query->add_option("--lake", qa.lake, "lake directory for --exact");
    query->add_flag("--json", qa.json, "print the ranking as JSON");
    query->add_flag("--include-numeric", qa.include_numeric, "also rank numeric and other columns");
    query->add_flag("--same-dataset", qa.same_dataset, "also rank columns of the query's dataset");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "benchmark P@k, R@k, timings and footprint against a ground truth");
    eval->add_option("lake,--lake", ea.lake, "directory of CSV files")->required();
    eval->add_option("--truth", ea.truth, "ground-truth CSV")->required();
    eval->add_option("--kmax", ea.kmax, "largest k")->check(CLI::PositiveNumber)->capture_default_str();
    eval->add_option("--repeats", ea.repeats, "timing repetitions (median reported)")->check(CLI::PositiveNumber)->capture_default_str();
    eval->add_option("--format", ea.format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}))->capture_default_str();
    eval->add_option("--profiles-out", ea.profiles_out, "where the timed run writes profiles (default: --profiles)");
    eval->add_flag("--study", ea.study, "also compare containment, Jaccard and multiset Jaccard on the labelled pairs");

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "generate a synthetic lake with planted joins");
    gen->add_option("out,--out", ga.out, "output directory (gets lake/ and ground_truth.csv)")->required();
    gen->add_option("--files", ga.files, "number of CSV files")->check(CLI::PositiveNumber)->capture_default_str();
    gen->add_option("--size", ga.size, "approximate bytes per file, e.g. 1MB or 256KiB")->capture_default_str();
    gen->add_option("--domains", ga.domains, "number of value domains")->check(CLI::PositiveNumber)->capture_default_str();
    gen->add_flag("--reference", ga.reference, "use the reference lake configuration (ignores --files/--size/--domains)");
    gen->add_option("--lake-seed", ga.seed, "generator seed (default: the configuration's own)");

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "fit a truncated normal to each column of a samples CSV");
    fit->add_option("samples,--samples", fa.samples, "CSV with one column per variable")->required();
    fit->add_option("--grid-step", fa.grid_step, "grid resolution for mu and sigma")->check(CLI::Range(1e-4, 0.1))->capture_default_str();

    const std::vector<std::string> commands{"profile", "train", "query", "eval", "gen", "fit"};
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

    try {
        // Locate --config and the command before the real parse so the file's
        // entries can be appended after the user's arguments.
        std::string config_path;
        std::string command;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
            if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
            if (command.empty() && std::find(commands.begin(), commands.end(), args[i]) != commands.end()) command = args[i];
        }
        if (config_path.empty()) {
            if (const char* env = std::getenv("LAKESCOUT_CONFIG"); env && *env) config_path = env;
        }
        if (!config_path.empty()) {
            if (!fs::exists(config_path)) throw NotFoundError("config file " + config_path + " not found");
            const auto extra = config_args(config_path, command, commands);
            args.insert(args.end(), extra.begin(), extra.end());
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const NotFoundError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (*profile) return cmd_profile(pa);
        if (*train_cmd) return cmd_train(ta);
        if (*query) return cmd_query(qa);
        if (*eval) return cmd_eval(ea);
        if (*gen) return cmd_gen(ga);
        if (*fit) return cmd_fit(fa);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NotFoundError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
