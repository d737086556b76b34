// Command-line front end: separate / synth / check / bench.
// Exit codes: 0 success (converged), 1 hard or usage error, 2 not converged.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cosetica/cosetica.hpp"

namespace {

using namespace cosetica;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

// "250:0.1" -> WarmStart{250, 0.1}; "0" disables
WarmStart parse_warm_start(const std::string& text) {
    WarmStart w;
    const auto colon = text.find(':');
    w.n_steps = std::stoi(text.substr(0, colon));
    if (colon != std::string::npos) w.rate = std::stod(text.substr(colon + 1));
    if (w.n_steps < 0 || w.rate <= 0.0)
        throw CLI::ValidationError("--warm-start", "expected <n>:<rate> with n >= 0, rate > 0");
    return w;
}

Distribution parse_distribution(const std::string& name) {
    if (name == "uniform") return {SourceKind::uniform, 0.5};
    if (name == "laplacian" || name == "laplace") return {SourceKind::laplacian, 0.5};
    if (name == "gaussian" || name == "normal") return {SourceKind::gaussian, 0.5};
    if (name == "rademacher") return {SourceKind::rademacher, 0.5};
    if (name.rfind("two_point", 0) == 0) {
        Distribution d{SourceKind::two_point, 0.5};
        const auto colon = name.find(':');
        if (colon != std::string::npos) d.p = std::stod(name.substr(colon + 1));
        if (!(d.p > 0.0 && d.p < 1.0))
            throw CLI::ValidationError("--dist", "two_point needs 0 < p < 1");
        return d;
    }
    throw CLI::ValidationError("--dist", "unknown distribution '" + name + "'");
}

std::vector<Distribution> parse_dist_list(const std::string& list, Index n_sources) {
    std::vector<Distribution> dists;
    if (list.empty()) {
        dists.assign(static_cast<std::size_t>(n_sources), Distribution{});
        return dists;
    }
    std::size_t pos = 0;
    while (pos <= list.size()) {
        auto comma = list.find(',', pos);
        if (comma == std::string::npos) comma = list.size();
        dists.push_back(parse_distribution(list.substr(pos, comma - pos)));
        pos = comma + 1;
        if (comma == list.size()) break;
    }
    if (static_cast<Index>(dists.size()) == 1 && n_sources > 1)
        dists.assign(static_cast<std::size_t>(n_sources), dists[0]);
    if (static_cast<Index>(dists.size()) != n_sources)
        throw CLI::ValidationError("--dist", "need 1 or N distribution names");
    return dists;
}

void write_trace_csv(const std::string& path, const IterationTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "t,phase,delta_norm,cost,system_condition,damping_halvings\n";
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        const StepRecord& s = trace.steps[t];
        out << t << ',' << (s.warm ? "warm" : "newton") << ',' << format_double(s.delta_norm)
            << ',' << format_double(s.cost) << ',' << format_double(s.system_condition) << ','
            << s.damping_halvings << '\n';
    }
}

struct SeparateArgs {
    std::string input;
    int cost_case = 1;
    double tol = 1e-8;
    int max_iters = 200;
    std::string damping = "halving";
    std::string warm_start = "0";
    bool no_center = false;
    std::string out_dir = ".";
};

int cmd_separate(const SeparateArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();

    Matrix table;
    try {
        table = read_csv(args.input);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    if (table.cols() < 2 || table.rows() < 100) {
        std::cerr << "error: need at least 2 channels and 100 samples, got " << table.cols()
                  << " x " << table.rows() << "\n";
        return kExitError;
    }

    SolverConfig cfg;
    cfg.cost_case = args.cost_case == 2 ? CostCase::case2 : CostCase::case1;
    cfg.tol_delta = args.tol;
    cfg.max_iters = args.max_iters;
    cfg.damping = args.damping == "none" ? Damping::none : Damping::halving;
    cfg.warm_start = parse_warm_start(args.warm_start);

    RunManifest manifest;
    manifest.input_path = args.input;
    manifest.config = cfg;
    manifest.centered = !args.no_center;
    manifest.data_checksum = file_checksum(args.input);

    int code;
    try {
        SignalMatrix x{table.transpose()};
        if (!args.no_center) x = center(x);
        const Index n = x.channels();

        const SeparationResult res = run(x, Matrix::Identity(n, n), cfg);

        namespace fs = std::filesystem;
        fs::create_directories(args.out_dir);
        const std::string c_path = (fs::path(args.out_dir) / "C.csv").string();
        const std::string y_path = (fs::path(args.out_dir) / "sources.csv").string();
        const std::string t_path = (fs::path(args.out_dir) / "trace.csv").string();
        const std::string m_path = (fs::path(args.out_dir) / "manifest.json").string();
        write_csv(c_path, res.C_final);
        write_csv(y_path, res.Y.data.transpose());
        write_trace_csv(t_path, res.trace);

        manifest.output_paths = {c_path, y_path, t_path};
        manifest.warm_steps = res.trace.warm_steps();
        manifest.newton_steps = res.trace.newton_steps();
        manifest.converged = res.converged;
        manifest.final_delta_norm =
            res.trace.steps.empty() ? 0.0 : res.trace.steps.back().delta_norm;
        manifest.final_cost = res.trace.steps.empty() ? 0.0 : res.trace.steps.back().cost;
        manifest.convergence_order = res.convergence_order;
        manifest.failure = res.failure;
        manifest.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        std::ofstream mout(m_path, std::ios::binary);
        mout << manifest.to_json().dump(2) << "\n";

        if (res.failure) {
            std::cerr << "error: " << *res.failure << "\n";
            code = kExitError;
        } else if (!res.converged) {
            std::cerr << "not converged after " << res.trace.newton_steps()
                      << " Newton iterations\n";
            code = kExitNotConverged;
        } else {
            std::cout << "converged: " << res.trace.newton_steps() << " Newton steps ("
                      << res.trace.warm_steps() << " warm), |delta| = "
                      << format_double(manifest.final_delta_norm) << "\n";
            code = kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return code;
}

struct SynthArgs {
    Index sources = 3;
    std::string dist;
    Index samples = 100000;
    double cond = 1.0;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

int cmd_synth(const SynthArgs& args) {
    if (args.sources < 2) {
        std::cerr << "error: --sources must be >= 2\n";
        return kExitError;
    }
    try {
        MixtureSpec spec;
        spec.n_sources = args.sources;
        spec.distributions = parse_dist_list(args.dist, args.sources);
        spec.samples = args.samples;
        spec.condition = args.cond;
        spec.seed = args.seed;
        const Mixture mix = generate_mixture(spec);

        namespace fs = std::filesystem;
        fs::create_directories(args.out_dir);
        write_csv((fs::path(args.out_dir) / "mixed.csv").string(), mix.X.data.transpose());
        write_csv((fs::path(args.out_dir) / "mixing.csv").string(), mix.A);
        write_csv((fs::path(args.out_dir) / "sources.csv").string(), mix.S.data.transpose());
        std::cout << "wrote mixed.csv, mixing.csv, sources.csv (" << args.sources << " x "
                  << args.samples << ", seed " << args.seed << ")\n";
        return kExitOk;
    } catch (const CLI::Error&) {
        throw;  // usage errors keep CLI11 formatting
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int cmd_check(const std::vector<Index>& dims, bool verbose, bool corrupt_w) {
    const std::vector<CheckResult> results = run_validation(dims, corrupt_w);
    std::size_t failed = 0;
    for (const CheckResult& r : results) {
        if (!r.pass) ++failed;
        if (verbose || !r.pass)
            std::cout << (r.pass ? "pass  " : "FAIL  ") << r.name
                      << (r.detail.empty() ? "" : "  [" + r.detail + "]") << "\n";
        else
            std::cout << "pass  " << r.name << "\n";
    }
    std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
    return failed == 0 ? kExitOk : kExitError;
}

struct BenchArgs {
    std::string grid;
    bool order_fit = false;
    std::string out = "bench.csv";
};

struct BenchPoint {
    Index sources = 3;
    std::string dist = "uniform";
    Index samples = 100000;
    int seeds = 10;
    double cond = 20.0;
    std::string cost_case = "1";  // "1", "2", or "both"
    WarmStart warm{250, 0.1, 4.0};
};

BenchPoint parse_grid(const std::string& text) {
    BenchPoint g;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string kv = text.substr(pos, comma - pos);
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--grid", "expected key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "sources")
            g.sources = std::stol(val);
        else if (key == "dist")
            g.dist = val;  // single name or '+'-separated list
        else if (key == "samples")
            g.samples = std::stol(val);
        else if (key == "seeds")
            g.seeds = std::stoi(val);
        else if (key == "cond")
            g.cond = std::stod(val);
        else if (key == "case")
            g.cost_case = val;
        else if (key == "warm")
            g.warm = parse_warm_start(val);
        else
            throw CLI::ValidationError("--grid", "unknown key '" + key + "'");
        pos = comma + 1;
    }
    if (g.cost_case != "1" && g.cost_case != "2" && g.cost_case != "both")
        throw CLI::ValidationError("--grid", "case must be 1, 2 or both");
    return g;
}

struct BenchRun {
    SeparationResult res;
    double amari = 0.0;
    double runtime_s = 0.0;
};

BenchRun bench_single(const Mixture& mix, CostCase cc, const BenchPoint& g) {
    SolverConfig cfg;
    cfg.cost_case = cc;
    cfg.max_iters = 50;
    cfg.warm_start = g.warm;

    BenchRun r;
    const auto t0 = std::chrono::steady_clock::now();
    const SignalMatrix x = center(mix.X);
    r.res = run(x, Matrix::Identity(mix.X.channels(), mix.X.channels()), cfg);
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.amari = amari_index(r.res.C_final, mix.A);
    return r;
}

int cmd_bench(const BenchArgs& args) {
    const BenchPoint g = parse_grid(args.grid);
    std::string dist_list = g.dist;
    std::replace(dist_list.begin(), dist_list.end(), '+', ',');

    std::ofstream out(args.out, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot open " << args.out << "\n";
        return kExitError;
    }
    out << "seed,case,converged,amari,warm_iters,newton_iters,runtime_s";
    if (args.order_fit) out << ",order";
    if (g.cost_case == "both") out << ",amari_between";
    out << "\n";

    std::vector<double> amaris;
    std::vector<double> betweens;
    bool all_ok = true;
    for (int seed = 0; seed < g.seeds; ++seed) {
        MixtureSpec spec;
        spec.n_sources = g.sources;
        spec.distributions = parse_dist_list(dist_list, g.sources);
        spec.samples = g.samples;
        spec.condition = g.cond;
        spec.seed = static_cast<std::uint64_t>(seed);
        const Mixture mix = generate_mixture(spec);

        std::vector<std::pair<int, BenchRun>> runs;
        if (g.cost_case == "1" || g.cost_case == "both")
            runs.emplace_back(1, bench_single(mix, CostCase::case1, g));
        if (g.cost_case == "2" || g.cost_case == "both")
            runs.emplace_back(2, bench_single(mix, CostCase::case2, g));

        std::optional<double> between;
        if (g.cost_case == "both" && runs[0].second.res.converged &&
            runs[1].second.res.converged)
            between = amari_index(runs[0].second.res.C_final,
                                  runs[1].second.res.C_final.inverse());

        for (const auto& [cc, r] : runs) {
            all_ok = all_ok && r.res.converged;
            amaris.push_back(r.amari);
            out << seed << ',' << cc << ',' << (r.res.converged ? 1 : 0) << ','
                << format_double(r.amari) << ',' << r.res.trace.warm_steps() << ','
                << r.res.trace.newton_steps() << ',' << format_double(r.runtime_s);
            if (args.order_fit)
                out << ',' << (r.res.convergence_order ? format_double(*r.res.convergence_order)
                                                       : std::string("na"));
            if (g.cost_case == "both")
                out << ',' << (between ? format_double(*between) : std::string("na"));
            out << "\n";
        }
        if (between) betweens.push_back(*between);
    }

    std::cout << "median amari: " << format_double(median(amaris)) << " over " << g.seeds
              << " seeds\n";
    if (!betweens.empty())
        std::cout << "median between-case amari: " << format_double(median(betweens)) << "\n";
    std::cout << "wrote " << args.out << "\n";
    return all_ok ? kExitOk : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coset Newton ICA: separation without prewhitening"};
    app.require_subcommand(1);

    SeparateArgs sep;
    CLI::App* s = app.add_subcommand("separate", "unmix a CSV of sampled signals");
    s->add_option("--input", sep.input, "input CSV (rows = samples, columns = channels)")
        ->required();
    s->add_option("--case", sep.cost_case, "cost case: 1 (kurtosis) or 2 (squared excess)")
        ->check(CLI::IsMember({1, 2}));
    s->add_option("--tol", sep.tol, "stop when ||delta|| falls below this");
    s->add_option("--max-iters", sep.max_iters, "Newton iteration cap")
        ->check(CLI::NonNegativeNumber);
    s->add_option("--damping", sep.damping, "step damping policy")
        ->check(CLI::IsMember({"none", "halving"}));
    s->add_option("--warm-start", sep.warm_start, "gradient warm phase as <n>:<rate> (0 = off)");
    s->add_flag("--no-center", sep.no_center, "skip per-channel mean removal");
    s->add_option("--out-dir", sep.out_dir, "output directory");

    SynthArgs syn;
    CLI::App* y = app.add_subcommand("synth", "generate a synthetic mixture");
    y->add_option("--sources", syn.sources, "number of sources (>= 2)")->required();
    y->add_option("--dist", syn.dist,
                  "comma-separated: uniform|laplacian|gaussian|rademacher|two_point[:p]");
    y->add_option("--samples", syn.samples, "sample count")->check(CLI::PositiveNumber);
    y->add_option("--cond", syn.cond, "mixing condition number (>= 1)");
    y->add_option("--seed", syn.seed, "RNG seed");
    y->add_option("--out-dir", syn.out_dir, "output directory");

    std::vector<Index> dims{2, 3, 4, 5};
    bool verbose = false, corrupt_w = false;
    CLI::App* c = app.add_subcommand("check", "run the validation suite");
    c->add_option("--dims", dims, "dimensions to exercise")->delimiter(',');
    c->add_flag("--verbose", verbose, "print details for passing checks too");
    c->add_flag("--corrupt-w", corrupt_w, "")->group("");  // test-only fault injection

    BenchArgs ben;
    CLI::App* b = app.add_subcommand("bench", "benchmark separation on seeded mixtures");
    b->add_option("--grid", ben.grid,
                  "key=value list: sources,dist,samples,seeds,cond,case,warm "
                  "(case=both adds a between-case column)");
    b->add_flag("--order-fit", ben.order_fit, "record the fitted convergence order per run");
    b->add_option("--out", ben.out, "metrics CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (s->parsed()) return cmd_separate(sep);
        if (y->parsed()) return cmd_synth(syn);
        if (c->parsed()) return cmd_check(dims, verbose, corrupt_w);
        if (b->parsed()) return cmd_bench(ben);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
