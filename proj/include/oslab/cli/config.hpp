#ifndef OSLAB_CLI_CONFIG_HPP
#define OSLAB_CLI_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "../error.hpp"
#include "../qtorus.hpp"
#include "../young.hpp"

namespace oslab::cli {

// Element given as rows [n_1, ..., n_d, re, im].
using ElementRows = std::vector<std::vector<double>>;

struct RunConfig {
    int d = 2;
    int R = 6;
    std::vector<double> theta; // strict upper triangle, row major; empty means zero
    double s = 1.0;
    std::string phi = "powerlog:p=2.5,alpha=0";
    std::uint64_t seed = 42;

    struct {
        int R = 40;
    } spectrum;
    struct {
        int R = 4;
        int trials = 100;
    } ideal;
    struct {
        int families = 200;
        int reconstruction_trials = 100;
    } factorize;
    struct {
        std::vector<int> radii{4, 8, 16, 32};
        double plateau = 0.02;
    } scan;
    struct {
        int R = 4;
        int trials = 50;
        ElementRows V;           // empty: V = 1
        ElementRows V_nonscalar; // empty: V = 1 + (U_1 + U_1^*)/2
    } pde;
    struct {
        int R = 4;
        int trials = 30;
        std::vector<double> t_list{0.001, 0.01, 0.1};
        double p = 2.0;
        double t_min = 1e-3;
        double t_max = 1e-1;
    } heat;
    struct {
        int R = 4;
        int pool_random = 100;
        int pairs = 50;
    } metric;

    ThetaMatrix theta_matrix() const
    {
        return theta.empty() ? ThetaMatrix::zero(d) : ThetaMatrix::from_upper(d, theta);
    }
    YoungFunction young() const { return parse_young(phi); }

    ElementRows potential_rows() const
    {
        if (!pde.V.empty())
            return pde.V;
        std::vector<double> one(std::size_t(d) + 2, 0.0);
        one[std::size_t(d)] = 1.0;
        return {one};
    }

    ElementRows nonscalar_rows() const
    {
        if (!pde.V_nonscalar.empty())
            return pde.V_nonscalar;
        ElementRows rows = potential_rows();
        for (double sign : {1.0, -1.0}) {
            std::vector<double> r(std::size_t(d) + 2, 0.0);
            r[0] = sign;
            r[std::size_t(d)] = 0.5;
            rows.push_back(r);
        }
        return rows;
    }
};

enum class FieldType { integer, unsigned_integer, real, string, real_list, int_list, element, map };

struct SchemaField {
    std::string key;
    FieldType type;
    std::string help;
    std::vector<SchemaField> children;
};

// The published configuration schema; configs/schema.md mirrors it.
inline const std::vector<SchemaField>& config_schema()
{
    static const std::vector<SchemaField> schema{
        {"d", FieldType::integer, "torus dimension, 1..4", {}},
        {"R", FieldType::integer, "truncation radius |n|_inf <= R", {}},
        {"theta", FieldType::real_list, "strict upper triangle of theta, row major", {}},
        {"s", FieldType::real, "Sobolev order, > 0", {}},
        {"phi", FieldType::string, "Young function descriptor", {}},
        {"seed", FieldType::unsigned_integer, "master seed", {}},
        {"spectrum", FieldType::map, "", {{"R", FieldType::integer, "radius for Weyl fits", {}}}},
        {"ideal",
         FieldType::map,
         "",
         {{"R", FieldType::integer, "radius for random triples", {}},
          {"trials", FieldType::integer, "number of triples", {}}}},
        {"factorize",
         FieldType::map,
         "",
         {{"families", FieldType::integer, "random vector families", {}},
          {"reconstruction_trials", FieldType::integer, "random vectors", {}}}},
        {"scan",
         FieldType::map,
         "",
         {{"radii", FieldType::int_list, "increasing radii", {}},
          {"plateau", FieldType::real, "relative plateau tolerance", {}}}},
        {"pde",
         FieldType::map,
         "",
         {{"R", FieldType::integer, "radius of the elliptic problem", {}},
          {"trials", FieldType::integer, "random right-hand sides", {}},
          {"V", FieldType::element, "scalar potential rows [n..., re, im]", {}},
          {"V_nonscalar", FieldType::element, "survey potential rows [n..., re, im]", {}}}},
        {"heat",
         FieldType::map,
         "",
         {{"R", FieldType::integer, "radius for smoothing trials", {}},
          {"trials", FieldType::integer, "random trace-class operators per t", {}},
          {"t_list", FieldType::real_list, "times for the smoothing survey", {}},
          {"p", FieldType::real, "Schatten exponent for the scaling fit", {}},
          {"t_min", FieldType::real, "scaling fit window start", {}},
          {"t_max", FieldType::real, "scaling fit window end", {}}}},
        {"metric",
         FieldType::map,
         "",
         {{"R", FieldType::integer, "radius for densities", {}},
          {"pool_random", FieldType::integer, "random trace-zero pool elements", {}},
          {"pairs", FieldType::integer, "random density pairs", {}}}},
    };
    return schema;
}

namespace detail {

inline std::string where(const YAML::Node& n, const std::string& path)
{
    const auto m = n.Mark();
    if (m.line < 0)
        return "key '" + path + "'";
    return "line " + std::to_string(m.line + 1) + ", key '" + path + "'";
}

[[noreturn]] inline void config_error(const YAML::Node& n, const std::string& path,
                                      const std::string& why)
{
    throw Error(ErrorCode::config, where(n, path) + ": " + why);
}

inline void check_scalar(const YAML::Node& n, const std::string& path, FieldType t)
{
    if (!n.IsScalar())
        config_error(n, path, "expected a scalar");
    try {
        switch (t) {
        case FieldType::integer: (void)n.as<int>(); break;
        case FieldType::unsigned_integer: (void)n.as<std::uint64_t>(); break;
        case FieldType::real: (void)n.as<double>(); break;
        default: break;
        }
    } catch (const YAML::Exception&) {
        config_error(n, path, "wrong type for value '" + n.Scalar() + "'");
    }
}

inline void validate(const YAML::Node& node, const std::vector<SchemaField>& fields,
                     const std::string& prefix)
{
    if (!node.IsMap())
        config_error(node, prefix.empty() ? "<root>" : prefix, "expected a mapping");
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        const SchemaField* f = nullptr;
        for (const auto& c : fields)
            if (c.key == key)
                f = &c;
        if (!f)
            config_error(kv.first, path, "unknown key");
        const YAML::Node& v = kv.second;
        switch (f->type) {
        case FieldType::map: validate(v, f->children, path); break;
        case FieldType::real_list:
        case FieldType::int_list:
            if (!v.IsSequence())
                config_error(v, path, "expected a list");
            for (const auto& e : v)
                check_scalar(e, path,
                             f->type == FieldType::real_list ? FieldType::real : FieldType::integer);
            break;
        case FieldType::element:
            if (!v.IsSequence())
                config_error(v, path, "expected a list of [n..., re, im] rows");
            for (const auto& row : v) {
                if (!row.IsSequence())
                    config_error(row, path, "expected a [n..., re, im] row");
                for (const auto& e : row)
                    check_scalar(e, path, FieldType::real);
            }
            break;
        default: check_scalar(v, path, f->type);
        }
    }
}

} // namespace detail

inline RunConfig parse_config(const YAML::Node& root)
{
    RunConfig c;
    if (!root || root.IsNull())
        return c;
    detail::validate(root, config_schema(), "");
    auto get = [](const YAML::Node& parent, const char* key, auto& out) {
        if (parent[key])
            out = parent[key].template as<std::decay_t<decltype(out)>>();
    };
    get(root, "d", c.d);
    get(root, "R", c.R);
    get(root, "theta", c.theta);
    get(root, "s", c.s);
    get(root, "phi", c.phi);
    get(root, "seed", c.seed);
    if (const auto n = root["spectrum"])
        get(n, "R", c.spectrum.R);
    if (const auto n = root["ideal"]) {
        get(n, "R", c.ideal.R);
        get(n, "trials", c.ideal.trials);
    }
    if (const auto n = root["factorize"]) {
        get(n, "families", c.factorize.families);
        get(n, "reconstruction_trials", c.factorize.reconstruction_trials);
    }
    if (const auto n = root["scan"]) {
        get(n, "radii", c.scan.radii);
        get(n, "plateau", c.scan.plateau);
    }
    if (const auto n = root["pde"]) {
        get(n, "R", c.pde.R);
        get(n, "trials", c.pde.trials);
        get(n, "V", c.pde.V);
        get(n, "V_nonscalar", c.pde.V_nonscalar);
    }
    if (const auto n = root["heat"]) {
        get(n, "R", c.heat.R);
        get(n, "trials", c.heat.trials);
        get(n, "t_list", c.heat.t_list);
        get(n, "p", c.heat.p);
        get(n, "t_min", c.heat.t_min);
        get(n, "t_max", c.heat.t_max);
    }
    if (const auto n = root["metric"]) {
        get(n, "R", c.metric.R);
        get(n, "pool_random", c.metric.pool_random);
        get(n, "pairs", c.metric.pairs);
    }
    return c;
}

// Semantic checks that do not depend on the YAML layout.
inline void check_config(const RunConfig& c)
{
    auto bad = [](const std::string& why) { throw Error(ErrorCode::config, why); };
    if (c.d < 1 || c.d > 4)
        bad("d must lie in 1..4");
    for (int r : {c.R, c.spectrum.R, c.ideal.R, c.pde.R, c.heat.R, c.metric.R})
        if (r < 1)
            bad("radii must be >= 1");
    if (!c.theta.empty() && c.theta.size() != std::size_t(c.d * (c.d - 1) / 2))
        bad("theta needs d(d-1)/2 entries");
    if (!(c.s > 0.0))
        bad("s must be > 0");
    try {
        (void)c.young();
    } catch (const Error& e) {
        bad(std::string("phi: ") + e.what());
    }
    for (int n : {c.ideal.trials, c.factorize.families, c.factorize.reconstruction_trials,
                  c.pde.trials, c.heat.trials, c.metric.pairs})
        if (n < 1)
            bad("trial counts must be >= 1");
    if (c.metric.pool_random < 0)
        bad("metric.pool_random must be >= 0");
    if (c.scan.radii.size() < 2)
        bad("scan.radii needs at least two radii");
    for (std::size_t i = 0; i < c.scan.radii.size(); ++i)
        if (c.scan.radii[i] < 1 || (i > 0 && c.scan.radii[i] <= c.scan.radii[i - 1]))
            bad("scan.radii must be positive and increasing");
    if (!(c.scan.plateau > 0.0))
        bad("scan.plateau must be > 0");
    for (double t : c.heat.t_list)
        if (!(t > 0.0))
            bad("heat.t_list entries must be > 0");
    if (!(c.heat.p >= 1.0) || !(c.heat.t_min > 0.0) || !(c.heat.t_max > c.heat.t_min))
        bad("heat scaling needs p >= 1 and 0 < t_min < t_max");
    for (const auto* rows : {&c.pde.V, &c.pde.V_nonscalar})
        for (const auto& r : *rows)
            if (r.size() != std::size_t(c.d) + 2)
                bad("potential rows need d integers then re, im");
}

inline RunConfig load_config_text(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::config, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    RunConfig c = parse_config(root);
    check_config(c);
    return c;
}

inline RunConfig load_config_file(const std::string& path)
{
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::BadFile&) {
        throw Error(ErrorCode::config, "cannot read config file '" + path + "'");
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::config,
                    path + ": line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    RunConfig c = parse_config(root);
    check_config(c);
    return c;
}

// Builds the element on a grid of radius r from [n..., re, im] rows.
inline TorusElement element_from_rows(const ElementRows& rows, GridPtr grid,
                                      const ThetaMatrix& theta)
{
    VectorXcd c = VectorXcd::Zero(Eigen::Index(grid->size()));
    const int d = grid->dim();
    for (const auto& row : rows) {
        if (row.size() != std::size_t(d) + 2)
            throw Error(ErrorCode::config, "element rows need d integers then re, im");
        std::vector<int> n(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            n[std::size_t(k)] = int(row[std::size_t(k)]);
            if (double(n[std::size_t(k)]) != row[std::size_t(k)])
                throw Error(ErrorCode::config, "lattice coordinates must be integers");
        }
        const auto idx = grid->index_of(n);
        if (!idx)
            throw Error(ErrorCode::config, "element row outside the grid");
        c[Eigen::Index(*idx)] += cplx(row[std::size_t(d)], row[std::size_t(d) + 1]);
    }
    return TorusElement(std::move(grid), theta, std::move(c));
}

} // namespace oslab::cli

#endif // OSLAB_CLI_CONFIG_HPP
