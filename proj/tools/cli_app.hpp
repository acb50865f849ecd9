#pragma once

// Front end shared by the pathgap executable and the CLI tests. run() never calls
// exit(); it returns the process exit code (0 pass, 1 check failure, 2 usage/config).

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pathgap/pathgap.hpp"

namespace pathgap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr std::uint64_t kDefaultSeed = 1;

struct BoundsArgs {
    double k1 = 0.0;
    double k2 = 0.0;
    std::vector<double> T;
    double T_min = 0.0;
    double T_max = 0.0;
    int T_count = 0;
    int profile = 0;
};

struct SimulateArgs {
    std::string manifold = "sphere";
    int dim = 2;
    std::optional<double> kappa;
    double T = 0.1;
    int steps = 0;
    std::size_t paths = 10000;
    std::string mode = "chi";
    std::string functional = "all";
    int functionals = 10;
    std::vector<double> direction;
    std::optional<double> k1, k2;
    std::uint64_t synthetic_seed = 1;
    std::string denominator = "exact";
};

struct AsymptoticsArgs {
    std::string manifold = "sphere";
    int dim = 3;
    std::optional<double> kappa;
    std::vector<double> ladder{0.005, 0.01, 0.02, 0.04};
    int steps = 0;
    std::size_t paths = 100000;
    std::vector<double> direction;
    double tolerance = 0.0;
    std::string denominator = "exact";
};

struct CommonArgs {
    std::uint64_t seed = kDefaultSeed;
    int threads = 1;
    bool antithetic = false;
    std::string format = "csv";
};

namespace detail {

inline ModelManifold make_constant_model(const std::string& name, int dim, std::optional<double> kappa)
{
    const ManifoldKind kind = parse_manifold_kind(name);
    switch (kind) {
    case ManifoldKind::Euclidean: return ModelManifold::euclidean(dim);
    case ManifoldKind::Sphere: return ModelManifold::sphere(dim, kappa.value_or(1.0));
    case ManifoldKind::Hyperbolic: return ModelManifold::hyperbolic(dim, kappa.value_or(-1.0));
    case ManifoldKind::SyntheticRicciPath: break;
    }
    throw UnsupportedError("this command needs a constant-curvature manifold");
}

inline Vec direction_vector(const std::vector<double>& given, int d)
{
    Vec a = Vec::Zero(d);
    if (given.empty()) {
        a(0) = 1.0;
        return a;
    }
    if (static_cast<int>(given.size()) != d) throw ConfigError("--direction needs exactly dim components");
    for (int i = 0; i < d; ++i) a(i) = given[static_cast<std::size_t>(i)];
    const double n = a.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("--direction must be a nonzero finite vector");
    return a / n;
}

inline ChiDenominator parse_denominator(const std::string& s)
{
    if (s == "exact") return ChiDenominator::Exact;
    if (s == "empirical") return ChiDenominator::Empirical;
    throw ConfigError("unknown --denominator '" + s + "' (exact | empirical)");
}

using pathgap::detail::format_double;

inline void emit(std::ostream& out, const std::string& format, const std::string& command, const Table& t)
{
    if (format == "json") write_json(out, command, t);
    else write_csv(out, t);
}

struct RowContext {
    Table* table;
    double T;
    std::string manifold;
    int dim;
    double kappa;
    std::int64_t n_paths;
    int n_steps;
    std::uint64_t seed;

    void add(const std::string& metric, double mean, double se) const
    {
        table->add({T, manifold, static_cast<std::int64_t>(dim), kappa, n_paths, static_cast<std::int64_t>(n_steps),
                    seed, metric, mean, se});
    }
    void add(const std::string& metric, const EstimateWithCI& e) const { add(metric, e.mean, e.stderr); }
};

inline void add_chi_rows(const RowContext& ctx, const ChiReport& r)
{
    ctx.add("chi", r.chi);
    ctx.add("predicted_first_order", r.predicted_first_order, 0.0);
    ctx.add("var_F", r.var_F);
    ctx.add("dirichlet", r.dirichlet);
    for (std::size_t i = 0; i < r.i_terms.size(); ++i) ctx.add("I" + std::to_string(i + 1), r.i_terms[i]);
}

}  // namespace detail

inline int cmd_bounds(const BoundsArgs& a, const CommonArgs& c, std::ostream& out)
{
    const CurvatureBounds cb(a.k1, a.k2);
    std::vector<double> Ts = a.T;
    if (a.T_count > 0) {
        if (!(a.T_max > a.T_min) || !(a.T_min > 0.0)) throw ConfigError("--T-range needs 0 < min < max");
        for (int i = 0; i < a.T_count; ++i)
            Ts.push_back(a.T_count == 1 ? a.T_min : a.T_min + (a.T_max - a.T_min) * i / (a.T_count - 1));
    }
    if (Ts.empty()) throw ConfigError("bounds needs --T or --T-range");

    if (a.profile > 0) {
        Table t{{"T", "k1", "k2", "t", "lambda"}, {}};
        for (double T : Ts)
            for (const auto& [s, v] : lambda_profile(Horizon(T), cb, a.profile)) t.add({T, cb.k1(), cb.k2(), s, v});
        detail::emit(out, c.format, "bounds", t);
        return kExitOk;
    }
    Table t = bounds_table();
    for (double T : Ts) {
        const auto r = bound_report(Horizon(T), cb);
        t.add({r.T, r.k1, r.k2, r.lambda_at_0, r.lambda_at_T, r.t_star, r.lambda_sup, r.psi, r.gap_lower_from_sup,
               r.gap_lower_from_psi});
    }
    detail::emit(out, c.format, "bounds", t);
    return kExitOk;
}

inline int cmd_simulate(const SimulateArgs& a, const CommonArgs& c, std::ostream& out)
{
    const RunOptions run{c.threads, c.antithetic};
    const int steps = a.steps > 0 ? a.steps : default_n_steps(a.T);
    const bool synthetic = parse_manifold_kind(a.manifold) == ManifoldKind::SyntheticRicciPath;

    std::optional<SyntheticRicci> syn;
    if (synthetic) syn = random_synthetic_ricci(a.dim, a.T, a.synthetic_seed);
    const ModelManifold m = synthetic ? ModelManifold::synthetic(a.dim, syn->ric)
                                      : detail::make_constant_model(a.manifold, a.dim, a.kappa);
    if (a.k1.has_value() != a.k2.has_value()) throw ConfigError("declare both --k1 and --k2 or neither");
    const CurvatureBounds declared = a.k1 ? CurvatureBounds(*a.k1, *a.k2)
                                          : (synthetic ? syn->bounds : constant_curvature_bounds(m));

    Table t = simulate_table();
    const double kappa = synthetic ? std::numeric_limits<double>::quiet_NaN() : m.sectional();
    detail::RowContext ctx{&t, a.T, std::string(to_string(m.kind())), a.dim, kappa, static_cast<std::int64_t>(a.paths), steps, c.seed};
    int code = kExitOk;

    if (a.mode == "chi") {
        ChiOptions opt{run, detail::parse_denominator(a.denominator)};
        const auto r = estimate_chi(m, detail::direction_vector(a.direction, a.dim), a.T, steps, a.paths, c.seed, opt);
        detail::add_chi_rows(ctx, r);
    } else if (a.mode == "theorem1") {
        const auto fam = theorem1_family(m.ambient_dim(), a.T, steps, a.functionals, c.seed);
        const auto r = verify_theorem1(m, declared, fam, a.T, steps, a.paths, c.seed, run);
        ctx.add("k1", declared.k1(), 0.0);
        ctx.add("k2", declared.k2(), 0.0);
        ctx.add("n_checks", static_cast<double>(r.n_checks), 0.0);
        ctx.add("satisfied_fraction", r.satisfied_fraction(), 0.0);
        ctx.add("max_relative_violation", r.max_relative_violation, 0.0);
        ctx.add("max_ratio", r.max_ratio, 0.0);
        ctx.add("passed", r.passed() ? 1.0 : 0.0, 0.0);
        if (!r.passed()) code = kExitCheckFailed;
    } else if (a.mode == "lsi") {
        bool any = false;
        for (const auto& f : lsi_family(m, a.T)) {
            if (a.functional != "all" && a.functional != f.name) continue;
            any = true;
            const auto r = verify_lsi(m, declared, f.F, a.T, steps, a.paths, c.seed, run);
            ctx.add(f.name + ".entropy", r.entropy);
            ctx.add(f.name + ".rhs", r.rhs);
            ctx.add(f.name + ".gap", r.gap);
            ctx.add(f.name + ".variance", r.variance);
            ctx.add(f.name + ".poincare_gap", r.poincare_gap);
            ctx.add(f.name + ".violated", r.violated ? 1.0 : 0.0, 0.0);
            if (r.violated) code = kExitCheckFailed;
        }
        if (!any) throw ConfigError("unknown LSI functional '" + a.functional + "'");
    } else if (a.mode == "delta") {
        const auto r = estimate_delta(m, detail::direction_vector(a.direction, a.dim), a.T, steps, a.paths, c.seed, run);
        ctx.add("delta_hat", r);
        ctx.add("delta_constant_curvature", m.sectional() * m.sectional() * (2.0 * a.dim - 2.0), 0.0);
    } else {
        throw ConfigError("unknown --mode '" + a.mode + "' (chi | theorem1 | lsi | delta)");
    }
    detail::emit(out, c.format, "simulate", t);
    return code;
}

inline int cmd_asymptotics(const AsymptoticsArgs& a, const CommonArgs& c, std::ostream& out)
{
    const ModelManifold m = detail::make_constant_model(a.manifold, a.dim, a.kappa);
    ChiOptions opt{{c.threads, c.antithetic}, detail::parse_denominator(a.denominator)};
    const auto r = small_time_slope(m, detail::direction_vector(a.direction, a.dim), a.ladder, a.steps, a.paths, c.seed, opt);

    Table t = simulate_table();
    const std::string name(to_string(m.kind()));
    const std::int64_t n = static_cast<std::int64_t>(a.paths);
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto& p = r.points[i];
        detail::RowContext ctx{&t, p.T, name, a.dim, m.sectional(), n, p.n_steps, ladder_seed(c.seed, i)};
        ctx.add("chi", p.chi);
        ctx.add("predicted_first_order", p.predicted_first_order, 0.0);
    }
    // T = 0 and n_steps = 0 mark ladder-level rows
    detail::RowContext fit{&t, 0.0, name, a.dim, m.sectional(), n, 0, c.seed};
    fit.add("slope", r.slope);
    fit.add("predicted_slope", r.predicted, 0.0);
    fit.add("relative_error", r.relative_error(), 0.0);
    fit.add("weighted", r.weighted ? 1.0 : 0.0, 0.0);
    detail::emit(out, c.format, "asymptotics", t);
    return (a.tolerance > 0.0 && !(r.relative_error() <= a.tolerance)) ? kExitCheckFailed : kExitOk;
}

// Effective configuration as an INI section that --config reads back unchanged.
namespace detail {

struct IniWriter {
    std::ostream& os;

    void key(const std::string& k, const std::string& v) const { os << k << '=' << v << '\n'; }
    void key(const std::string& k, double v) const { key(k, format_double(v)); }
    void key(const std::string& k, const std::optional<double>& v) const
    {
        if (v) key(k, *v);
    }
    void key(const std::string& k, const std::vector<double>& v) const
    {
        if (v.empty()) return;
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
        key(k, '"' + s + '"');
    }
    void quoted(const std::string& k, const std::string& v) const { key(k, '"' + v + '"'); }
    void common(const CommonArgs& c) const
    {
        key("seed", std::to_string(c.seed));
        key("threads", std::to_string(c.threads));
        key("antithetic", c.antithetic ? "true" : "false");
        quoted("format", c.format);
    }
};

}  // namespace detail

inline void dump_bounds(std::ostream& os, const BoundsArgs& a, const CommonArgs& c)
{
    const detail::IniWriter w{os};
    os << "[bounds]\n";
    w.key("k1", a.k1);
    w.key("k2", a.k2);
    w.key("T", a.T);
    if (a.T_count > 0) {
        w.key("T-min", a.T_min);
        w.key("T-max", a.T_max);
        w.key("T-count", std::to_string(a.T_count));
    }
    w.key("profile", std::to_string(a.profile));
    w.common(c);
}

inline void dump_simulate(std::ostream& os, const SimulateArgs& a, const CommonArgs& c)
{
    const detail::IniWriter w{os};
    os << "[simulate]\n";
    w.quoted("manifold", a.manifold);
    w.key("dim", std::to_string(a.dim));
    w.key("kappa", a.kappa);
    w.key("T", a.T);
    w.key("steps", std::to_string(a.steps));
    w.key("paths", std::to_string(a.paths));
    w.quoted("mode", a.mode);
    w.quoted("functional", a.functional);
    w.key("functionals", std::to_string(a.functionals));
    w.key("direction", a.direction);
    w.key("k1", a.k1);
    w.key("k2", a.k2);
    w.key("synthetic-seed", std::to_string(a.synthetic_seed));
    w.quoted("denominator", a.denominator);
    w.common(c);
}

inline void dump_asymptotics(std::ostream& os, const AsymptoticsArgs& a, const CommonArgs& c)
{
    const detail::IniWriter w{os};
    os << "[asymptotics]\n";
    w.quoted("manifold", a.manifold);
    w.key("dim", std::to_string(a.dim));
    w.key("kappa", a.kappa);
    w.key("ladder", a.ladder);
    w.key("steps", std::to_string(a.steps));
    w.key("paths", std::to_string(a.paths));
    w.key("direction", a.direction);
    w.key("tolerance", a.tolerance);
    w.quoted("denominator", a.denominator);
    w.common(c);
}

/// Parses argv and dispatches. Tables go to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"pathgap: spectral-gap bounds and Monte-Carlo checks on path space"};
    app.require_subcommand(1);
    app.fallthrough();  // --config and --dump-config may follow the subcommand
    app.set_config("--config", "", "INI file with one [section] per subcommand");
    bool dump_config = false;
    app.add_flag("--dump-config", dump_config, "Print the effective configuration and exit");

    CommonArgs common;
    const char* env_seed = std::getenv("PATHGAP_SEED");
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "Base RNG seed (default from PATHGAP_SEED, else 1)");
        sub->add_option("--threads", common.threads, "Worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
        sub->add_flag("--antithetic", common.antithetic, "Pair each path with its reflected increments");
        sub->add_option("--format", common.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    };

    BoundsArgs ba;
    auto* bounds = app.add_subcommand("bounds", "Closed-form comparison weight and gap bounds");
    bounds->add_option("--k1", ba.k1, "Bound on |ric|")->required();
    bounds->add_option("--k2", ba.k2, "Lower bound on ric")->required();
    bounds->add_option("--T", ba.T, "Horizon(s)")->delimiter(',');
    bounds->add_option("--T-min", ba.T_min, "Sweep start");
    bounds->add_option("--T-max", ba.T_max, "Sweep end");
    bounds->add_option("--T-count", ba.T_count, "Sweep points")->check(CLI::NonNegativeNumber);
    bounds->add_option("--profile", ba.profile, "Emit Lambda(t, T) on this many cells instead of the summary");
    add_common(bounds);

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Monte-Carlo estimators on a model manifold");
    sim->add_option("--manifold", sa.manifold, "euclidean | sphere | hyperbolic | synthetic");
    sim->add_option("--dim", sa.dim, "Intrinsic dimension");
    sim->add_option("--kappa", sa.kappa, "Sectional curvature (default +1 sphere, -1 hyperbolic)");
    sim->add_option("--T", sa.T, "Horizon");
    sim->add_option("--steps", sa.steps, "Grid cells (0 = max(64, ceil(T/1e-4)))");
    sim->add_option("--paths", sa.paths, "Number of paths");
    sim->add_option("--mode", sa.mode, "chi | theorem1 | lsi | delta");
    sim->add_option("--functional", sa.functional, "LSI family member, or all");
    sim->add_option("--functionals", sa.functionals, "Random functionals for theorem1");
    sim->add_option("--direction", sa.direction, "Direction a (normalised)")->delimiter(',');
    sim->add_option("--k1", sa.k1, "Declared |ric| bound (overrides the model)");
    sim->add_option("--k2", sa.k2, "Declared lower ric bound (overrides the model)");
    sim->add_option("--synthetic-seed", sa.synthetic_seed, "Seed of the random synthetic ric path");
    sim->add_option("--denominator", sa.denominator, "chi denominator: exact | empirical");
    add_common(sim);

    AsymptoticsArgs aa;
    auto* asym = app.add_subcommand("asymptotics", "Small-time slope of chi_T - 1");
    asym->add_option("--manifold", aa.manifold, "euclidean | sphere | hyperbolic");
    asym->add_option("--dim", aa.dim, "Intrinsic dimension");
    asym->add_option("--kappa", aa.kappa, "Sectional curvature");
    asym->add_option("--ladder", aa.ladder, "Horizons (at least 4)")->delimiter(',');
    asym->add_option("--steps", aa.steps, "Grid cells per horizon (0 = default scaling)");
    asym->add_option("--paths", aa.paths, "Paths per horizon");
    asym->add_option("--direction", aa.direction, "Direction a (normalised)")->delimiter(',');
    asym->add_option("--tolerance", aa.tolerance, "Exit 1 if the relative slope error exceeds this (0 = no check)");
    asym->add_option("--denominator", aa.denominator, "chi denominator: exact | empirical");
    add_common(asym);

    try {
        if (env_seed != nullptr && *env_seed != '\0') {
            try {
                std::size_t used = 0;
                common.seed = std::stoull(env_seed, &used);
                if (used != std::string(env_seed).size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                err << "pathgap: PATHGAP_SEED is not an unsigned integer: " << env_seed << '\n';
                return kExitUsage;
            }
        }
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "pathgap: " << e.what() << '\n';
        return kExitUsage;
    }

    if (dump_config) {
        if (*bounds) dump_bounds(out, ba, common);
        else if (*sim) dump_simulate(out, sa, common);
        else dump_asymptotics(out, aa, common);
        return kExitOk;
    }

    try {
        if (*bounds) return cmd_bounds(ba, common, out);
        if (*sim) return cmd_simulate(sa, common, out);
        return cmd_asymptotics(aa, common, out);
    } catch (const DegenerateSampleError& e) {
        err << "pathgap: " << e.what() << '\n';
        return kExitCheckFailed;
    } catch (const std::exception& e) {
        err << "pathgap: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace pathgap::cli
