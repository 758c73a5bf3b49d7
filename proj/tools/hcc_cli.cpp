// Command-line front end: rate-allocation optimization, finishing-time
// analytics, Monte Carlo simulation, and an end-to-end encode/execute/decode
// demo. Output is plot-ready CSV/JSON.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcc/hcc.hpp"

namespace {

using nlohmann::json;

struct RunConfig {
    hcc::SystemShape shape{20, 100, 0};  // r = 0 means "not set"
    hcc::StragglerModel model{1.0, 0.0, ""};
    std::optional<std::vector<int>> ks;
    std::string scheme = "hierarchical";
    std::vector<double> t_grid;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    std::string out;
    std::string preset = "none";
    std::string mu = "0.1";
    int stragglers = 0;
    std::string field = "real";
    std::string config_path;
};

hcc::SchemeVariant parse_scheme(const std::string& s) {
    if (s == "hierarchical") return hcc::SchemeVariant::hierarchical;
    if (s == "mds_baseline") return hcc::SchemeVariant::mds_baseline;
    if (s == "uncoded") return hcc::SchemeVariant::uncoded;
    throw std::invalid_argument("unknown scheme: " + s);
}

// Config file values fill in anything the flags left at defaults; flags win.
void merge_config_file(RunConfig& cfg, const CLI::App& cmd) {
    if (cfg.config_path.empty()) return;
    std::ifstream in(cfg.config_path);
    if (!in) throw std::invalid_argument("cannot open config file " + cfg.config_path);
    json j;
    in >> j;
    auto absent = [&](const std::string& flag) {
        const CLI::Option* opt = cmd.get_option_no_throw(flag);
        return !opt || opt->count() == 0;
    };
    if (j.contains("n") && absent("--n")) cfg.shape.n = j["n"];
    if (j.contains("k") && absent("--k")) cfg.shape.k = j["k"];
    if (j.contains("r") && absent("--r")) cfg.shape.r = j["r"];
    if (j.contains("per_task_rate") && absent("--rate")) cfg.model.per_task_rate = j["per_task_rate"];
    if (j.contains("per_task_shift") && absent("--shift")) cfg.model.per_task_shift = j["per_task_shift"];
    if (j.contains("ks") && absent("--ks")) cfg.ks = j["ks"].get<std::vector<int>>();
    if (j.contains("t_grid") && absent("--t-grid")) cfg.t_grid = j["t_grid"].get<std::vector<double>>();
    if (j.contains("trials") && absent("--trials")) cfg.trials = j["trials"];
    if (j.contains("seed") && absent("--seed")) cfg.seed = j["seed"];
    if (j.contains("scheme") && absent("--scheme")) cfg.scheme = j["scheme"];
    if (j.contains("mu") && absent("--mu")) cfg.mu = j["mu"].get<std::string>();
}

void add_common_flags(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--n", cfg.shape.n, "worker count");
    cmd->add_option("--k", cfg.shape.k, "total task count");
    cmd->add_option("--r", cfg.shape.r, "layer count (omit to pick the best)");
    cmd->add_option("--rate", cfg.model.per_task_rate, "per-task exponential rate lambda");
    cmd->add_option("--shift", cfg.model.per_task_shift, "per-task deterministic floor a");
    cmd->add_option("--mu", cfg.mu, "rate constant for exponent coefficients (exact decimal)");
    cmd->add_option("--alpha", cfg.model.per_task_shift, "alias for --shift");
    cmd->add_option("--stragglers", cfg.stragglers, "straggler margin S");
    cmd->add_option("--ks", cfg.ks, "explicit layer allocation")->delimiter(',');
    cmd->add_option("--t-grid,--t", cfg.t_grid, "evaluation times")->delimiter(',');
    cmd->add_option("--trials", cfg.trials, "Monte Carlo trials");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--preset", cfg.preset, "figure preset: fig3|fig4|fig5|fig6|none");
    cmd->add_option("--out", cfg.out, "output file (default stdout)");
    cmd->add_option("--scheme", cfg.scheme, "hierarchical|mds_baseline|uncoded");
    cmd->add_option("--field", cfg.field, "codec arithmetic: real|prime");
    cmd->add_option("--config", cfg.config_path, "JSON config file (flags override)");
}

void apply_preset(RunConfig& cfg, const CLI::App& cmd) {
    auto absent = [&](const std::string& flag) {
        const CLI::Option* opt = cmd.get_option_no_throw(flag);
        return !opt || opt->count() == 0;
    };
    if (cfg.preset == "none") return;
    if (cfg.preset == "fig3") {
        if (absent("--n")) cfg.shape.n = 20;
        if (absent("--k")) cfg.shape.k = 100;
        if (absent("--r")) cfg.shape.r = 10;
        if (absent("--rate")) cfg.model.per_task_rate = 10.0;  // k * mu, mu = 0.1
        if (absent("--shift")) cfg.model.per_task_shift = 0.01;
        if (cfg.t_grid.empty()) {
            for (int i = 1; i <= 20; ++i) cfg.t_grid.push_back(i * 0.1);
        }
    } else if (cfg.preset == "fig4") {
        if (absent("--n")) cfg.shape.n = 20;
        if (absent("--rate")) cfg.model.per_task_rate = 1.0;
        if (absent("--shift")) cfg.model.per_task_shift = 0.01;
    } else if (cfg.preset == "fig5" || cfg.preset == "fig6") {
        if (absent("--n")) cfg.shape.n = 20;
        if (absent("--mu")) cfg.mu = "0.1";
    } else {
        throw std::invalid_argument("unknown preset: " + cfg.preset);
    }
}

std::ofstream open_out_file(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::invalid_argument("cannot open output file " + path);
    return f;
}

struct OutStream {
    std::ofstream file;
    std::ostream* os = &std::cout;
    explicit OutStream(const std::string& path) {
        if (!path.empty()) {
            file = open_out_file(path);
            os = &file;
        }
    }
    std::ostream& get() { return *os; }
};

hcc::LayerAllocation resolve_alloc(const RunConfig& cfg) {
    if (cfg.ks) {
        hcc::LayerAllocation a;
        a.ks = *cfg.ks;
        return a;
    }
    hcc::SystemShape shape = cfg.shape;
    if (shape.r <= 0) {
        auto [r, sol] = hcc::select_r(shape.n, shape.k, shape.k, cfg.stragglers);
        return sol.ks;
    }
    return hcc::optimize_maximin(shape, cfg.stragglers).ks;
}

int cmd_optimize(RunConfig& cfg, const CLI::App& cmd) {
    merge_config_file(cfg, cmd);
    apply_preset(cfg, cmd);
    int r = cfg.shape.r;
    hcc::MaximinSolution sol;
    if (r <= 0) {
        auto [chosen, s] = hcc::select_r(cfg.shape.n, cfg.shape.k, cfg.shape.k, cfg.stragglers);
        r = chosen;
        sol = s;
    } else {
        sol = hcc::optimize_maximin(cfg.shape, cfg.stragglers);
    }
    std::ostringstream ks_text;
    for (std::size_t i = 0; i < sol.ks.ks.size(); ++i)
        ks_text << (i ? "," : "") << sol.ks.ks[i];

    OutStream out(cfg.out);
    json j{{"r", r},
           {"ks", sol.ks.ks},
           {"z", {{"num", sol.z.numerator()}, {"den", sol.z.denominator()}}},
           {"z_value", hcc::to_double(sol.z)},
           {"stragglers", sol.straggler_margin}};
    if (!cfg.out.empty()) out.get() << j.dump(2) << '\n';
    std::cout << "r=" << r << '\n'
              << "ks=" << ks_text.str() << '\n'
              << "z=" << sol.z.numerator() << '/' << sol.z.denominator() << '\n';
    return 0;
}

int cmd_cdf(RunConfig& cfg, const CLI::App& cmd, bool with_simulation) {
    merge_config_file(cfg, cmd);
    apply_preset(cfg, cmd);
    if (cfg.t_grid.empty()) throw std::invalid_argument("cdf: need --t or --t-grid");
    for (std::size_t i = 1; i < cfg.t_grid.size(); ++i)
        if (!(cfg.t_grid[i] > cfg.t_grid[i - 1]))
            throw std::invalid_argument("cdf: t grid must be strictly increasing");

    const hcc::SchemeVariant variant = parse_scheme(cfg.scheme);
    hcc::SystemShape shape = cfg.shape;
    std::optional<hcc::LayerAllocation> alloc;
    if (variant == hcc::SchemeVariant::hierarchical) {
        alloc = resolve_alloc(cfg);
        shape.r = alloc->layers();
        shape.k = alloc->total();
    }
    shape.validate();
    cfg.model.validate();

    std::optional<hcc::MonteCarloResult> mc;
    if (with_simulation) {
        hcc::MonteCarloConfig mcfg{shape, cfg.model, hcc::SchemeId{variant}, alloc, cfg.t_grid};
        mc = hcc::run_monte_carlo(mcfg, cfg.trials, cfg.seed);
    }

    OutStream out(cfg.out);
    std::ostream& os = out.get();
    os.precision(12);
    os << "t,analytic_cdf,analytic_tail,asymptotic_tail";
    if (mc) os << ",empirical_cdf,std_error";
    os << '\n';
    for (std::size_t g = 0; g < cfg.t_grid.size(); ++g) {
        const double t = cfg.t_grid[g];
        double cdf = 0.0, asym = 0.0;
        switch (variant) {
            case hcc::SchemeVariant::hierarchical:
                cdf = hcc::finishing_cdf_dp<double>(*alloc, shape, cfg.model, t);
                asym = hcc::failure_tail_asymptotic(*alloc, shape, cfg.model, t);
                break;
            case hcc::SchemeVariant::mds_baseline: {
                cdf = hcc::baseline_lee_cdf<double>(shape, cfg.model, t);
                const int need = shape.k / shape.r;
                asym = std::exp(hcc::log_binomial(shape.n, need - 1) -
                                cfg.model.per_task_rate * (shape.n - need + 1) * t / shape.r);
                break;
            }
            case hcc::SchemeVariant::uncoded: {
                const double scale = static_cast<double>(shape.k) / shape.n;
                cdf = std::pow(hcc::cdf_s_tasks(1, t / scale, cfg.model), shape.n);
                asym = shape.n * std::exp(-cfg.model.per_task_rate * t / scale);
                break;
            }
        }
        os << t << ',' << cdf << ',' << 1.0 - cdf << ',' << asym;
        if (mc) os << ',' << mc->cdf[g] << ',' << mc->cdf_se[g];
        os << '\n';
    }
    return 0;
}

int cmd_expected(RunConfig& cfg, const CLI::App& cmd) {
    merge_config_file(cfg, cmd);
    apply_preset(cfg, cmd);
    std::vector<int> k_values;
    const CLI::Option* k_opt = cmd.get_option_no_throw("--k");
    if (k_opt && k_opt->count() > 0) {
        k_values.push_back(cfg.shape.k);
    } else if (cfg.preset == "fig4") {
        k_values = {20, 40, 60, 80, 100};
    } else {
        k_values.push_back(cfg.shape.k);
    }
    cfg.model.validate();

    OutStream out(cfg.out);
    std::ostream& os = out.get();
    os.precision(12);
    os << "k,scheme,expected_time\n";
    for (int k : k_values) {
        auto [r, sol] = hcc::select_r(cfg.shape.n, k, k, cfg.stragglers);
        hcc::SystemShape shape{cfg.shape.n, k, r};
        const double e_hier = hcc::expected_finishing_time(sol.ks, shape, cfg.model);
        os << k << ",hierarchical," << e_hier << '\n';
        if (k % r == 0) {
            const double e_lee = hcc::expected_finishing_time(
                hcc::SchemeId{hcc::SchemeVariant::mds_baseline}, shape, cfg.model);
            os << k << ",mds_baseline," << e_lee << '\n';
        }
        if (k % shape.n == 0) {
            const double e_unc = hcc::expected_finishing_time(
                hcc::SchemeId{hcc::SchemeVariant::uncoded}, shape, cfg.model);
            os << k << ",uncoded," << e_unc << '\n';
        }
    }
    return 0;
}

int cmd_exponents(RunConfig& cfg, const CLI::App& cmd) {
    merge_config_file(cfg, cmd);
    apply_preset(cfg, cmd);
    const hcc::Rational mu = hcc::parse_decimal(cfg.mu);
    std::vector<int> k_values;
    const CLI::Option* k_opt = cmd.get_option_no_throw("--k");
    if (k_opt && k_opt->count() > 0) {
        k_values.push_back(cfg.shape.k);
    } else if (cfg.preset == "fig5" || cfg.preset == "fig6") {
        for (int k = 1; k <= 190; ++k) k_values.push_back(k);
    } else {
        k_values.push_back(cfg.shape.k);
    }

    OutStream out(cfg.out);
    std::ostream& os = out.get();
    os.precision(12);
    os << "k,L,L_p,L_u,ratio\n";
    for (int k : k_values) {
        auto [r, sol] = hcc::select_r(cfg.shape.n, k, k, cfg.stragglers);
        hcc::SystemShape shape{cfg.shape.n, k, r};
        const hcc::LeadingCoefficient lead = hcc::leading_coefficient(sol.ks, shape, mu);
        os << k << ',' << hcc::to_double(lead.value) << ',';
        if (k % r == 0) {
            const hcc::Rational lp = mu * hcc::Rational(shape.n - k / r + 1, r);
            os << hcc::to_double(lp) << ',';
            if (k % shape.n == 0)
                os << hcc::to_double(mu * hcc::Rational(shape.n, k));
            os << ',' << hcc::to_double(lead.value / lp);
        } else {
            os << ',';
            if (k % shape.n == 0) os << hcc::to_double(mu * hcc::Rational(shape.n, k));
            os << ',';
        }
        os << '\n';
    }
    return 0;
}

int cmd_simulate(RunConfig& cfg, const CLI::App& cmd) { return cmd_cdf(cfg, cmd, true); }

int cmd_demo(RunConfig& cfg, const CLI::App& cmd, const std::string& matrix_path,
             const std::string& vector_path) {
    merge_config_file(cfg, cmd);
    apply_preset(cfg, cmd);
    cfg.model.validate();

    const hcc::Matrix<double> a = hcc::read_matrix_csv(matrix_path);
    const hcc::Matrix<double> xm = hcc::read_matrix_csv(vector_path);
    if (xm.cols() != 1 || xm.rows() != a.cols())
        throw std::invalid_argument("demo: vector shape does not match the matrix");

    hcc::LayerAllocation alloc = resolve_alloc(cfg);
    hcc::SystemShape shape{cfg.shape.n, alloc.total(), alloc.layers()};
    if (a.rows() % shape.k != 0)
        throw std::invalid_argument("demo: k must divide the matrix row count");
    const hcc::LayerPlan plan = hcc::make_layer_plan(alloc);

    auto report_and_check = [&](auto report, const auto& direct) {
        double max_rel = 0.0;
        for (std::size_t i = 0; i < direct.size(); ++i) {
            const double d = static_cast<double>(direct[i]);
            const double got = static_cast<double>(report.decoded_output(i, 0));
            const double denom = std::max(1.0, std::abs(d));
            max_rel = std::max(max_rel, std::abs(got - d) / denom);
        }
        std::cout << "tau=" << report.trial.tau << '\n';
        for (std::size_t j = 0; j < report.trial.per_layer_done.size(); ++j)
            std::cout << "layer_" << j + 1 << "_done=" << report.trial.per_layer_done[j] << '\n';
        std::cout << "messages=" << report.messages << '\n'
                  << "max_relative_error=" << max_rel << '\n';
        if (max_rel > 1e-6) throw hcc::numerical_error("demo: decode mismatch vs direct product");
        std::cout << "verified=true\n";
    };

    if (cfg.field == "prime") {
        hcc::LinearJobT<hcc::PrimeField> job;
        job.matrix = hcc::Matrix<std::uint64_t>(a.rows(), a.cols());
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j)
                job.matrix(i, j) = hcc::PrimeField::from_int(static_cast<std::int64_t>(a(i, j)));
        job.input.resize(xm.rows());
        for (std::size_t i = 0; i < xm.rows(); ++i)
            job.input[i] = hcc::PrimeField::from_int(static_cast<std::int64_t>(xm(i, 0)));
        const auto gen = hcc::GeneratorSpec::make(shape.n, hcc::GeneratorMode::prime_field);
        auto direct = hcc::apply_task<hcc::PrimeField>(job.matrix, job.input);
        auto report =
            hcc::run_execution_harness<hcc::PrimeField>(job, plan, gen, cfg.model, cfg.seed);
        report_and_check(report, direct);
    } else if (cfg.field == "real") {
        hcc::LinearJob job;
        job.matrix = a;
        job.input.resize(xm.rows());
        for (std::size_t i = 0; i < xm.rows(); ++i) job.input[i] = xm(i, 0);
        const auto gen = hcc::GeneratorSpec::make(shape.n, hcc::GeneratorMode::real_evaluation);
        auto direct = hcc::apply_task<hcc::RealField>(job.matrix, job.input);
        auto report =
            hcc::run_execution_harness<hcc::RealField>(job, plan, gen, cfg.model, cfg.seed);
        report_and_check(report, direct);
    } else {
        throw std::invalid_argument("demo: --field must be real or prime");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical coded computation toolkit"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string matrix_path, vector_path;

    CLI::App* optimize = app.add_subcommand("optimize", "maximin rate allocation");
    add_common_flags(optimize, cfg);
    CLI::App* cdf = app.add_subcommand("cdf", "analytic finishing-time distribution");
    add_common_flags(cdf, cfg);
    CLI::App* expected = app.add_subcommand("expected", "expected finishing times");
    add_common_flags(expected, cfg);
    CLI::App* exponents = app.add_subcommand("exponents", "failure-exponent coefficients");
    add_common_flags(exponents, cfg);
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo vs analytic CDF");
    add_common_flags(simulate, cfg);
    CLI::App* demo = app.add_subcommand("demo", "end-to-end encode/execute/decode");
    add_common_flags(demo, cfg);
    demo->add_option("--matrix", matrix_path, "job matrix CSV")->required();
    demo->add_option("--vector", vector_path, "input vector CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (optimize->parsed()) return cmd_optimize(cfg, *optimize);
        if (cdf->parsed()) return cmd_cdf(cfg, *cdf, false);
        if (expected->parsed()) return cmd_expected(cfg, *expected);
        if (exponents->parsed()) return cmd_exponents(cfg, *exponents);
        if (simulate->parsed()) return cmd_simulate(cfg, *simulate);
        if (demo->parsed()) return cmd_demo(cfg, *demo, matrix_path, vector_path);
    } catch (const hcc::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
