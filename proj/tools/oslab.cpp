#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <oslab/cli/claims.hpp>
#include <oslab/cli/config.hpp>
#include <oslab/io.hpp>
#include <oslab/oslab.hpp>

namespace {

using namespace oslab;
using namespace oslab::cli;
using io::json;
using io::num;

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    std::string format = "json";
    bool timings = false;
    std::optional<int> d;
    std::optional<int> R;
    std::optional<double> s;
    std::optional<std::string> phi;
};

void write_file(const Globals& g, const std::string& name, const std::string& body)
{
    std::filesystem::create_directories(g.out);
    const auto path = std::filesystem::path(g.out) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorCode::config, "cannot write " + path.string());
    f << body;
    std::cout << path.string() << "\n";
}

void flatten(const json& j, const std::string& prefix, std::string& out)
{
    if (j.is_object()) {
        for (const auto& [k, v] : j.items())
            flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
    } else {
        out += prefix + "," + (j.is_string() ? j.get<std::string>() : j.dump()) + "\n";
    }
}

// Writes `stem.json`, or `stem.csv` as key,value rows when --format csv.
void emit(const Globals& g, const std::string& stem, const json& j)
{
    if (g.format == "csv") {
        std::string body = "key,value\n";
        flatten(j, "", body);
        write_file(g, stem + ".csv", body);
    } else {
        write_file(g, stem + ".json", j.dump(2) + "\n");
    }
}

RunConfig resolve(const Globals& g)
{
    RunConfig c = g.config.empty() ? RunConfig{} : load_config_file(g.config);
    if (g.seed)
        c.seed = *g.seed;
    if (g.d)
        c.d = *g.d;
    if (g.R)
        c.R = *g.R;
    if (g.s)
        c.s = *g.s;
    if (g.phi)
        c.phi = *g.phi;
    check_config(c);
    return c;
}

int cmd_spectrum(const Globals& g)
{
    const RunConfig c = resolve(g);
    const auto grid = make_grid(c.d, g.R ? *g.R : c.spectrum.R);
    std::vector<double> lambdas(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i)
        lambdas[i] = laplace_eigenvalue_from_norm2(grid->norm2(i));
    write_file(g, "eigenvalues.csv", io::spectrum_csv(lambdas));
    write_file(g, "ls_spectrum.csv", io::spectrum_csv(ls_symbol(*grid, c.s)));
    json fit;
    int code = 0;
    try {
        fit = io::to_json(weyl_fit(*grid));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::truncation_too_small)
            throw;
        std::cerr << e.what() << "\n";
        fit = {{"d", c.d}, {"error", e.what()}};
    }
    write_file(g, "weyl_fit.json", fit.dump(2) + "\n");
    return code;
}

int cmd_norm(const Globals& g, const std::string& input)
{
    const RunConfig c = resolve(g);
    std::ifstream in(input);
    if (!in)
        throw Error(ErrorCode::config, "cannot read sequence file '" + input + "'");
    auto values = io::read_sequence(in);
    const auto phi = c.young();
    emit(g, "norm",
         {{"phi", phi.descriptor()}, {"length", values.size()},
          {"norm", num(luxemburg_norm(values, phi))}});
    return 0;
}

int cmd_membership(const Globals& g)
{
    const RunConfig c = resolve(g);
    const auto grid = make_grid(c.d, c.R);
    const Verdict v = ls_membership(*grid, c.s, c.young());
    emit(g, "membership",
         {{"d", c.d}, {"R", c.R}, {"s", num(c.s)}, {"phi", c.phi}, {"membership", io::to_json(v)}});
    return 0;
}

int cmd_factorize(const Globals& g)
{
    const RunConfig c = resolve(g);
    FactorizationOptions opt;
    opt.families = std::size_t(c.factorize.families);
    opt.reconstruction_trials = std::size_t(c.factorize.reconstruction_trials);
    opt.seed = c.seed;
    try {
        emit(g, "factorize",
             factorization_numbers(factorize(make_grid(c.d, c.R), c.s, c.young(), opt)));
        return 0;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::membership_failed)
            throw;
        const auto scan = optimality_scan(c.d, c.s, c.young(), c.scan.radii, c.scan.plateau);
        emit(g, "factorize", {{"error", e.what()}, {"optimality_scan", scan_numbers(scan)}});
        std::cerr << e.what() << "\n";
        return 1;
    }
}

int cmd_solve(const Globals& g, const std::string& rhs)
{
    const RunConfig c = resolve(g);
    const auto grid = make_grid(c.d, g.R ? *g.R : c.pde.R);
    const auto theta = c.theta_matrix();
    const EllipticProblem prob(element_from_rows(c.potential_rows(), grid, theta), c.s, c.young());
    TorusElement f(grid, theta);
    if (rhs.empty()) {
        auto rng = stream(c.seed, "solve");
        f = random_element(grid, theta, rng);
    } else {
        std::ifstream in(rhs);
        if (!in)
            throw Error(ErrorCode::config, "cannot read right-hand side '" + rhs + "'");
        f = io::element_from_json(json::parse(in)).on_grid(grid);
    }
    const GapReport gap = spectral_gap(prob);
    const auto reg = regularity_check(prob, f, gap.lambda0);
    emit(g, "solve",
         {{"lambda0", num(gap.lambda0)},
          {"vmin", num(gap.vmin)},
          {"trace_v", num(gap.trace_v)},
          {"residual", num(reg.residual)},
          {"u_sobolev_phi_norm", num(reg.u_norm)},
          {"f_phi_norm", num(reg.f_norm)},
          {"regularity", io::to_json(reg.verdict)},
          {"u", io::to_json(solve(prob, f))}});
    return 0;
}

int cmd_heat(const Globals& g)
{
    const RunConfig c = resolve(g);
    const auto grid = make_grid(c.d, g.R ? *g.R : c.heat.R);
    const auto phi = c.young();
    std::string table = "t,profile,rank,norm,ratio\n";
    json per_t = json::array();
    std::uint64_t k = 0;
    for (double t : c.heat.t_list) {
        const auto rep =
            heat_smoothing_check(grid, t, phi, std::size_t(c.heat.trials), c.seed + 7919 * ++k);
        for (const auto& r : rep.flat_low_modes)
            table += io::fmt15(t) + ",flat_low," + std::to_string(r.rank) + "," +
                     io::fmt15(r.norm) + "," + io::fmt15(r.ratio) + "\n";
        for (const auto& r : rep.trials)
            table += io::fmt15(t) + "," + profile_name(r.profile) + "," + std::to_string(r.rank) +
                     "," + io::fmt15(r.norm) + "," + io::fmt15(r.ratio) + "\n";
        per_t.push_back({{"t", num(t)},
                         {"bound", num(rep.bound)},
                         {"worst_ratio", num(rep.worst_ratio)},
                         {"verdict", io::to_json(rep.verdict)}});
    }
    const auto fit = heat_scaling_fit(c.d, c.heat.p, c.heat.t_min, c.heat.t_max);
    std::string scaling = "t,S_p_norm\n";
    for (const auto& r : fit.rows)
        scaling += io::fmt15(r.t) + "," + io::fmt15(r.value) + "\n";
    write_file(g, "heat_margins.csv", table);
    write_file(g, "heat_scaling.csv", scaling);
    emit(g, "heat",
         {{"phi", phi.descriptor()},
          {"smoothing", std::move(per_t)},
          {"scaling", {{"p", num(fit.p)}, {"slope", num(fit.slope)},
                       {"classical", num(fit.classical)}, {"R", fit.radius}}}});
    return 0;
}

int cmd_distance(const Globals& g, const std::string& rho_path, const std::string& sigma_path)
{
    const RunConfig c = resolve(g);
    const auto grid = make_grid(c.d, g.R ? *g.R : c.metric.R);
    const auto theta = c.theta_matrix();
    auto rng = stream(c.seed, "distance");
    auto load = [&](const std::string& path) {
        if (path.empty())
            return random_density(grid, rng);
        std::ifstream in(path);
        if (!in)
            throw Error(ErrorCode::config, "cannot read density '" + path + "'");
        return DensityOperator(io::matrix_from_json(json::parse(in)));
    };
    const DensityOperator rho = load(rho_path);
    const DensityOperator sigma = load(sigma_path);
    const LipPool pool = default_pool(rho.grid(), theta, std::size_t(c.metric.pool_random), c.seed);
    const auto rep = transport_check(rho, sigma, c.young(), pool, theta);
    std::string table = "candidate,pairing,lip,op_norm,bound_s1,bound_phi\n";
    for (const auto& cand : rep.distance.candidates)
        table += cand.label + "," + io::fmt15(cand.pairing) + "," + io::fmt15(cand.lip) + "," +
                 io::fmt15(cand.op_norm) + "," + io::fmt15(cand.bound_s1) + "," +
                 io::fmt15(cand.bound_phi) + "\n";
    write_file(g, "distance_candidates.csv", table);
    emit(g, "distance",
         {{"distance_lower", num(rep.distance_lower)},
          {"best_candidate", rep.distance.candidates.empty()
                                 ? std::string()
                                 : rep.distance.candidates[rep.distance.argmax].label},
          {"K_hat", num(rep.k_hat)},
          {"inclusion_constant", num(rep.inclusion_constant)},
          {"trace_norm", num(rep.trace_norm)},
          {"orlicz_norm", num(rep.orlicz_norm)},
          {"rhs", num(rep.rhs)},
          {"chain_failures", rep.chain_failures},
          {"transport", io::to_json(rep.verdict)},
          {"note", "K_hat stands in for the cb norm of the Lip-norm map"}});
    return 0;
}

int cmd_check_all(const Globals& g)
{
    const RunConfig c = resolve(g);
    const auto res = check_all(c, g.timings);
    emit(g, "check_all", res.report);
    for (const auto& claim : res.report["claims"])
        std::cerr << claim["status"].get<std::string>() << "  " << claim["id"].get<std::string>()
                  << "\n";
    return res.exit_code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Orlicz-Schatten numerics on truncated quantum tori"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "YAML configuration file");
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_flag("--timings", g.timings, "include claim runtimes (breaks byte identity)");
    app.add_option("--d", g.d, "torus dimension");
    app.add_option("--R", g.R, "truncation radius");
    app.add_option("--s", g.s, "Sobolev order");
    app.add_option("--phi", g.phi, "Young function descriptor");

    std::string input, rhs, rho, sigma;
    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues, L_s spectrum and Weyl fit");
    auto* norm = app.add_subcommand("norm", "Luxemburg norm of a sequence file");
    norm->add_option("--input", input, "one value per line")->required();
    auto* membership = app.add_subcommand("membership", "L_s in S_Phi verdict");
    auto* fact = app.add_subcommand("factorize", "factorization report");
    auto* solve_cmd = app.add_subcommand("solve", "elliptic solve and regularity check");
    solve_cmd->add_option("--rhs", rhs, "element JSON for f (random if omitted)");
    auto* heat = app.add_subcommand("heat", "heat smoothing survey and scaling fit");
    auto* distance = app.add_subcommand("distance", "spectral distance and transport check");
    distance->add_option("--rho", rho, "density matrix JSON (random if omitted)");
    distance->add_option("--sigma", sigma, "density matrix JSON (random if omitted)");
    auto* check = app.add_subcommand("check-all", "run every registered claim");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (spectrum->parsed())
            return cmd_spectrum(g);
        if (norm->parsed())
            return cmd_norm(g, input);
        if (membership->parsed())
            return cmd_membership(g);
        if (fact->parsed())
            return cmd_factorize(g);
        if (solve_cmd->parsed())
            return cmd_solve(g, rhs);
        if (heat->parsed())
            return cmd_heat(g);
        if (distance->parsed())
            return cmd_distance(g, rho, sigma);
        if (check->parsed())
            return cmd_check_all(g);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::config ? 2 : 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
