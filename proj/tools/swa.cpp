// Command-line front end: select, tune, mbounds, screen, assure, combine, simulate.

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "swa/assurance.hpp"
#include "swa/dataset.hpp"
#include "swa/errors.hpp"
#include "swa/io.hpp"
#include "swa/json_io.hpp"
#include "swa/mbounds.hpp"
#include "swa/parallel.hpp"
#include "swa/prescreen.hpp"
#include "swa/simlab.hpp"
#include "swa/swa.hpp"
#include "swa/tuning.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct Global {
    std::uint64_t seed = 42;
    std::size_t workers = 0;
    std::string config;
    std::string out;
    std::string format = "json";
};

struct DataArgs {
    std::string x, y;
    bool no_header = false;
    bool standardize = false;
};

struct SwaArgs {
    swa::Index s = 0;
    swa::Index m = 5000;
    std::optional<swa::Index> q, keep_top, divisor;
    std::string adjust = "bonferroni";
    double alpha = 0.05;
    bool stepwise_final = false, stepwise_subsample = false, intercept = false;
    double stepwise_threshold = 0.05;
};

std::vector<swa::Index> parse_list(const std::string& text, const std::string& what) {
    std::vector<swa::Index> out;
    for (auto cell : swa::detail::split_commas(text)) {
        const auto t = swa::detail::trim(cell);
        swa::Index v = 0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
            throw swa::ConfigError(what + ": '" + std::string(t) + "' is not a non-negative integer");
        out.push_back(v);
    }
    if (out.empty()) throw swa::ConfigError(what + " is empty");
    return out;
}

void add_data_options(CLI::App* cmd, DataArgs& a) {
    cmd->add_option("--x", a.x, "design matrix CSV (n rows, p columns)")->required();
    cmd->add_option("--y", a.y, "response CSV (one column)")->required();
    cmd->add_flag("--no-header", a.no_header, "CSV files have no header row");
    cmd->add_flag("--standardize", a.standardize, "center and scale every column first");
}

void add_swa_options(CLI::App* cmd, SwaArgs& a, bool need_s) {
    auto* s = cmd->add_option("--s", a.s, "subsample size");
    if (need_s) s->required();
    cmd->add_option("--m", a.m, "number of subsamples")->capture_default_str();
    cmd->add_option("--q", a.q, "number of semifinalists (default s)");
    cmd->add_option("--keep-top", a.keep_top, "best submodels kept for scoring (default min(s, m))");
    cmd->add_option("--adjust", a.adjust, "bonferroni, bh or none")->capture_default_str();
    cmd->add_option("--alpha", a.alpha, "significance level")->capture_default_str();
    cmd->add_option("--divisor", a.divisor, "multiplicity family size (default p)");
    cmd->add_flag("--stepwise-final", a.stepwise_final, "backward elimination in the confirmatory fit");
    cmd->add_flag("--stepwise-subsample", a.stepwise_subsample, "backward elimination in every subsample fit");
    cmd->add_option("--stepwise-threshold", a.stepwise_threshold, "elimination p-value")->capture_default_str();
    cmd->add_flag("--intercept", a.intercept, "fit an intercept");
}

swa::SwaConfig make_config(const SwaArgs& a, std::uint64_t seed) {
    swa::SwaConfig c;
    c.s = a.s;
    c.m = a.m;
    c.q = a.q;
    c.keep_top = a.keep_top;
    c.bonferroni_divisor = a.divisor;
    c.adjustment = swa::parse_adjustment(a.adjust);
    c.alpha = a.alpha;
    c.stepwise_final = a.stepwise_final;
    c.stepwise_subsample = a.stepwise_subsample;
    c.stepwise_threshold = a.stepwise_threshold;
    c.intercept = a.intercept;
    c.seed = seed;
    return c;
}

swa::Dataset load(const DataArgs& a) {
    swa::Dataset d = swa::load_csv(a.x, a.y, !a.no_header);
    return a.standardize ? swa::standardize(d, true, true) : d;
}

swa::Json input_json(const DataArgs& a) {
    return {{"x", a.x}, {"y", a.y}, {"header", !a.no_header}, {"standardize", a.standardize}};
}

/// Prints `json` (or `csv` under --format csv) and mirrors both into --out.
void emit(const Global& g, const std::string& stem, const swa::Json& json, const std::string& csv) {
    const std::string text = swa::dump(json);
    if (!g.out.empty()) {
        swa::ensure_directory(g.out);
        swa::write_atomic(fs::path(g.out) / (stem + ".json"), text);
        if (!csv.empty()) swa::write_atomic(fs::path(g.out) / (stem + ".csv"), csv);
    }
    std::cout << (g.format == "csv" ? csv : text);
}

/// Reads a flat key=value file; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw swa::DataError("cannot open config file " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto t = swa::detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos)
            throw swa::ConfigError(path + ":" + std::to_string(no) + ": expected key=value");
        std::string key(swa::detail::trim(t.substr(0, eq)));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        out.emplace_back(key, std::string(swa::detail::trim(t.substr(eq + 1))));
    }
    return out;
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
    std::optional<std::string> path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    return path;
}

bool has_long_option(const CLI::App* app, const std::string& key) {
    for (const auto* opt : app->get_options())
        for (const auto& name : opt->get_lnames())
            if (name == key) return true;
    return false;
}

/// Splices config entries into argv ahead of the explicit flags, so explicit
/// flags win under the take-last policy. Keys no command knows are errors;
/// keys meant for a different subcommand are ignored.
std::vector<std::string> splice_config(CLI::App& app, std::vector<std::string> args) {
    const auto path = find_config_path(args);
    if (!path) return args;
    const auto entries = read_config(*path);

    std::size_t sub_pos = args.size();
    CLI::App* sub = nullptr;
    for (std::size_t i = 1; i < args.size() && !sub; ++i)
        for (auto* cmd : app.get_subcommands([](CLI::App*) { return true; }))
            if (cmd->get_name() == args[i]) {
                sub = cmd;
                sub_pos = i;
                break;
            }

    std::vector<std::string> global, local;
    for (const auto& [key, value] : entries) {
        const std::string arg = "--" + key + "=" + value;
        if (key == "config") continue;
        if (has_long_option(&app, key)) {
            global.push_back(arg);
            continue;
        }
        if (sub && has_long_option(sub, key)) {
            local.push_back(arg);
            continue;
        }
        bool known = false;
        for (auto* cmd : app.get_subcommands([](CLI::App*) { return true; })) known = known || has_long_option(cmd, key);
        if (!known) throw swa::ConfigError("config file " + *path + ": unknown key '" + key + "'");
    }
    if (sub) args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, local.begin(), local.end());
    args.insert(args.begin() + 1, global.begin(), global.end());
    return args;
}

int run(int argc, char** argv) {
    CLI::App app{"Subsampling winner feature selection for sparse linear regression", "swa"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    Global g;
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();
    app.add_option("--workers", g.workers, "worker threads (0 = logical cores)");
    app.add_option("--config", g.config, "key=value file; explicit flags override it");
    app.add_option("--out", g.out, "directory for output files");
    app.add_option("--format", g.format, "stdout format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

    DataArgs data;
    SwaArgs sw;

    // select
    auto* select_cmd = app.add_subcommand("select", "run SWA on a dataset")->fallthrough();
    add_data_options(select_cmd, data);
    add_swa_options(select_cmd, sw, true);
    swa::Index screen_k = 0;
    select_cmd->add_option("--screen-k", screen_k, "keep the k features most correlated with y first (0 = off)");

    // tune
    auto* tune_cmd = app.add_subcommand("tune", "multipanel weight curves over a grid of s")->fallthrough();
    DataArgs tune_data;
    add_data_options(tune_cmd, tune_data);
    std::string s_grid;
    swa::Index tune_m = 5000;
    swa::TuneOptions topts;
    std::string scale = "both";
    tune_cmd->add_option("--s-grid", s_grid, "comma-separated, strictly increasing")->required();
    tune_cmd->add_option("--m", tune_m, "subsamples per panel")->capture_default_str();
    tune_cmd->add_option("--display", topts.display, "features shown per panel")->capture_default_str();
    tune_cmd->add_option("--drop-factor", topts.drop_factor, "elbow guard")->capture_default_str();
    tune_cmd->add_option("--min-coverage", topts.min_coverage, "share of positive weights a panel needs")
        ->capture_default_str();
    tune_cmd->add_flag("--intercept", topts.intercept, "fit an intercept");
    tune_cmd->add_option("--scale", scale, "fixed, free or both")->capture_default_str();

    // mbounds
    auto* mb_cmd = app.add_subcommand("mbounds", "bounds on the number of subsamples m")->fallthrough();
    long long mb_p = 0, mb_p0 = 0, mb_s = 0;
    double gamma = 0.05;
    mb_cmd->add_option("--p", mb_p, "number of features")->required();
    mb_cmd->add_option("--p0", mb_p0, "number of true features")->required();
    mb_cmd->add_option("--s", mb_s, "subsample size")->required();
    mb_cmd->add_option("--gamma", gamma, "allowed failure probability")->capture_default_str();

    // screen
    auto* screen_cmd = app.add_subcommand("screen", "marginal-correlation prescreen")->fallthrough();
    DataArgs screen_data;
    add_data_options(screen_cmd, screen_data);
    std::optional<swa::Index> top_k;
    std::optional<double> r_min;
    auto* k_opt = screen_cmd->add_option("--top-k", top_k, "keep the k largest |r|");
    auto* r_opt = screen_cmd->add_option("--threshold,--r-min", r_min, "keep |r| >= threshold");
    k_opt->excludes(r_opt);

    // assure
    auto* assure_cmd = app.add_subcommand("assure", "double assurance over several s values")->fallthrough();
    DataArgs assure_data;
    SwaArgs assure_sw;
    add_data_options(assure_cmd, assure_data);
    add_swa_options(assure_cmd, assure_sw, false);
    std::string s_list;
    assure_cmd->add_option("--s-list", s_list, "comma-separated s values")->required();

    // combine
    auto* combine_cmd = app.add_subcommand("combine", "SWA finalists plus an external feature list")->fallthrough();
    DataArgs combine_data;
    SwaArgs combine_sw;
    add_data_options(combine_cmd, combine_data);
    add_swa_options(combine_cmd, combine_sw, true);
    std::string external, source_tag;
    combine_cmd->add_option("--external", external, "file with one feature name per line")->required();
    combine_cmd->add_option("--source-tag", source_tag, "label for the external list (default: file name)");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo capture tables on synthetic data")->fallthrough();
    SwaArgs sim_sw;
    add_swa_options(sim_cmd, sim_sw, true);
    std::string scenario = "example2";
    swa::Index sim_p = 100, trials = 100, prescreen_k = 0;
    double rho = 0.0, sigma = 1.0;
    sim_cmd->add_option("--scenario", scenario, "example1, example2 or null")
        ->check(CLI::IsMember({"example1", "example2", "null"}))
        ->capture_default_str();
    sim_cmd->add_option("--p", sim_p, "total features (example2, null)")->capture_default_str();
    sim_cmd->add_option("--rho", rho, "AR(1) correlation among the first 11 columns")->capture_default_str();
    sim_cmd->add_option("--sigma", sigma, "noise standard deviation")->capture_default_str();
    sim_cmd->add_option("--trials", trials, "number of simulated datasets")->capture_default_str();
    sim_cmd->add_option("--prescreen-k", prescreen_k, "top-k correlation screen before SWA (0 = off)");

    std::vector<std::string> args(argv, argv + argc);
    std::vector<std::string> spliced;
    try {
        spliced = splice_config(app, args);
    } catch (const swa::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        std::vector<std::string> reversed(spliced.rbegin(), spliced.rend() - 1);
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        std::cerr << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }
    const std::size_t workers = g.workers == 0 ? swa::default_workers() : g.workers;

    if (*select_cmd) {
        swa::SwaConfig cfg = make_config(sw, g.seed);
        const swa::Dataset full = load(data);
        swa::Json head;
        head["input"] = input_json(data);
        std::optional<swa::Dataset> screened;
        if (screen_k > 0) {
            screened = swa::reduce(full, swa::screen_top_k(full, screen_k, workers));
            head["input"]["screen_k"] = screen_k;
        }
        const swa::Dataset& d = screened ? *screened : full;
        const auto result = swa::select(d, cfg, workers);
        swa::Json j = head;
        j.update(swa::selection_json(result, d));
        if (!g.out.empty()) {
            swa::ensure_directory(g.out);
            swa::write_atomic(fs::path(g.out) / "scores.csv", swa::score_table_csv(result.score_table, d));
        }
        emit(g, "select", j, swa::finalists_csv(result));
    } else if (*tune_cmd) {
        const swa::Dataset d = load(tune_data);
        topts.workers = workers;
        const auto panel_scale = swa::parse_panel_scale(scale);
        const auto report = swa::tune(d, parse_list(s_grid, "--s-grid"), tune_m, g.seed, topts);
        if (!g.out.empty()) swa::emit_panels(report, g.out, panel_scale);
        swa::Json j;
        j["input"] = input_json(tune_data);
        j.update(swa::tune_json(report));
        std::string csv = "s,elbow,stability,upper_arm\n";
        for (const auto& c : report.curves) {
            const auto& e = report.elbows.at(c.s);
            std::string arm;
            if (const auto it = report.upper_arms.find(c.s); it != report.upper_arms.end())
                for (auto f : it->second) arm += (arm.empty() ? "" : " ") + std::to_string(f);
            csv += std::to_string(c.s) + "," + (e ? std::to_string(*e) : "none") + "," +
                   std::string(swa::to_string(report.stability.at(c.s))) + "," + arm + "\n";
        }
        emit(g, "tune", j, csv);
    } else if (*mb_cmd) {
        const auto b = swa::m_bounds(mb_p, mb_p0, mb_s, gamma);
        const auto j = swa::mbounds_json(mb_p, mb_p0, mb_s, gamma, b);
        const std::string csv = "alpha_lower,alpha_upper,m_lower,m_upper\n" + swa::detail::format_double(b.alpha_lower) +
                                "," + swa::detail::format_double(b.alpha_upper) + "," +
                                swa::detail::format_double(b.lower) + "," + swa::detail::format_double(b.upper) + "\n";
        emit(g, "mbounds", j, csv);
    } else if (*screen_cmd) {
        if (!top_k && !r_min) throw swa::ConfigError("screen needs --top-k or --threshold");
        const swa::Dataset d = load(screen_data);
        const auto sr = top_k ? swa::screen_top_k(d, *top_k, workers) : swa::screen_threshold(d, *r_min, workers);
        swa::Json j;
        j["input"] = input_json(screen_data);
        j.update(swa::screen_json(sr, d));
        if (!g.out.empty()) {
            swa::ensure_directory(g.out);
            swa::write_atomic(fs::path(g.out) / "screened_x.csv", swa::design_csv(swa::reduce(d, sr)));
        }
        emit(g, "screen", j, swa::screen_csv(sr, d));
    } else if (*assure_cmd) {
        const swa::Dataset d = load(assure_data);
        swa::SwaConfig cfg = make_config(assure_sw, g.seed);
        const auto s_values = parse_list(s_list, "--s-list");
        if (cfg.s == 0) cfg.s = s_values.front();
        const auto result = swa::double_assurance(d, s_values, cfg, workers);
        swa::Json j;
        j["input"] = input_json(assure_data);
        j.update(swa::selection_json(result, d));
        emit(g, "assure", j, swa::finalists_csv(result));
    } else if (*combine_cmd) {
        const swa::Dataset d = load(combine_data);
        const swa::SwaConfig cfg = make_config(combine_sw, g.seed);
        std::vector<std::string> names;
        for (const auto& line : swa::detail::read_lines(external))
            if (const auto t = swa::detail::trim(line); !t.empty()) names.emplace_back(t);
        const auto base = swa::select(d, cfg, workers);
        const auto result =
            swa::combine_external(d, base, names, cfg, source_tag.empty() ? fs::path(external).filename().string() : source_tag);
        swa::Json j;
        j["input"] = input_json(combine_data);
        j["input"]["external"] = external;
        j.update(swa::selection_json(result, d));
        emit(g, "combine", j, swa::finalists_csv(result));
    } else if (*sim_cmd) {
        swa::sim::ScenarioSpec spec = scenario == "example1" ? swa::sim::make_example1()
                                      : scenario == "null"   ? swa::sim::make_null(sim_p, sigma)
                                                             : swa::sim::make_example2(sim_p, rho, sigma);
        const swa::SwaConfig cfg = make_config(sim_sw, g.seed);
        swa::sim::Pipeline pipeline = swa::sim::PlainPipeline{};
        if (prescreen_k > 0) pipeline = swa::sim::PrescreenTopK{prescreen_k};
        const auto report = swa::sim::run_trials(spec, cfg, trials, pipeline, workers);
        swa::Json j;
        j["scenario"] = {{"name", spec.name}, {"n", spec.n}, {"p", spec.p}, {"p0", spec.p0()},
                         {"rho", spec.rho}, {"sigma", spec.sigma}, {"prescreen_k", prescreen_k}};
        j["config"] = swa::config_json(cfg, prescreen_k > 0 ? prescreen_k : spec.p);
        j.update(swa::capture_json(report.table));
        emit(g, "simulate", j, swa::capture_csv(report.table));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const swa::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const swa::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const swa::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
