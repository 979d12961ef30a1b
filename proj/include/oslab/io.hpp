#ifndef OSLAB_IO_HPP
#define OSLAB_IO_HPP

#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "qtorus.hpp"
#include "spectral.hpp"
#include "verdict.hpp"

namespace oslab::io {

using json = nlohmann::ordered_json;

// Round to 15 significant digits so reports print at most that many.
inline double round15(double x)
{
    if (!std::isfinite(x) || x == 0.0)
        return x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return std::strtod(buf, nullptr);
}

inline std::string fmt15(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

// Report number: 15 significant digits, non-finite values as strings.
inline json num(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    return round15(x);
}

inline json to_json(const Verdict& v)
{
    json j;
    j["verdict"] = verdict_name(v);
    if (const auto* h = std::get_if<Holds>(&v)) {
        j["margin"] = num(h->margin);
        j["lower"] = num(h->lower);
        j["upper"] = num(h->upper);
    } else if (const auto* f = std::get_if<Fails>(&v)) {
        j["witness"] = f->witness;
        j["value"] = num(f->value);
    } else {
        const auto& i = std::get<Inconclusive>(v);
        j["lower"] = num(i.lower);
        j["upper"] = num(i.upper);
    }
    return j;
}

// {d, R, theta: upper triangle, coeffs: [[n..., re, im], ...]} listing the
// nonzero coefficients. Full precision so that a round trip is exact.
inline json to_json(const TorusElement& a)
{
    json j;
    j["d"] = a.grid()->dim();
    j["R"] = a.grid()->radius();
    j["theta"] = a.theta().upper();
    json coeffs = json::array();
    for (std::size_t i = 0; i < a.grid()->size(); ++i) {
        const cplx c = a.coeffs()[Eigen::Index(i)];
        if (c == cplx{})
            continue;
        json row = json::array();
        for (int x : a.grid()->point(i))
            row.push_back(x);
        row.push_back(c.real());
        row.push_back(c.imag());
        coeffs.push_back(std::move(row));
    }
    j["coeffs"] = std::move(coeffs);
    return j;
}

inline TorusElement element_from_json(const json& j)
{
    try {
        const int d = j.at("d").get<int>();
        const int r = j.at("R").get<int>();
        const auto upper = j.at("theta").get<std::vector<double>>();
        const auto grid = make_grid(d, r);
        const ThetaMatrix theta = ThetaMatrix::from_upper(d, upper);
        VectorXcd c = VectorXcd::Zero(Eigen::Index(grid->size()));
        for (const auto& row : j.at("coeffs")) {
            if (!row.is_array() || row.size() != std::size_t(d) + 2)
                throw Error(ErrorCode::config, "coefficient rows need d integers then re, im");
            std::vector<int> n(static_cast<std::size_t>(d));
            for (int k = 0; k < d; ++k)
                n[std::size_t(k)] = row[std::size_t(k)].get<int>();
            const auto idx = grid->index_of(n);
            if (!idx)
                throw Error(ErrorCode::grid_mismatch, "coefficient outside the grid");
            c[Eigen::Index(*idx)] =
                cplx(row[std::size_t(d)].get<double>(), row[std::size_t(d) + 1].get<double>());
        }
        return TorusElement(grid, theta, std::move(c));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config, std::string("bad element JSON: ") + e.what());
    }
}

// Dense complex matrix as rows of [re, im] pairs.
inline json to_json(const MatrixRep& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.entries.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.entries.cols(); ++k)
            row.push_back(json::array({m.entries(i, k).real(), m.entries(i, k).imag()}));
        rows.push_back(std::move(row));
    }
    json j;
    j["d"] = m.grid->dim();
    j["R"] = m.grid->radius();
    j["hermitian"] = m.hermitian;
    j["entries"] = std::move(rows);
    return j;
}

inline MatrixRep matrix_from_json(const json& j)
{
    try {
        const auto grid = make_grid(j.at("d").get<int>(), j.at("R").get<int>());
        const auto n = Eigen::Index(grid->size());
        const auto& rows = j.at("entries");
        if (rows.size() != std::size_t(n))
            throw Error(ErrorCode::grid_mismatch, "matrix row count differs from grid size");
        MatrixXcd m(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& row = rows[std::size_t(i)];
            if (row.size() != std::size_t(n))
                throw Error(ErrorCode::grid_mismatch, "matrix column count differs");
            for (Eigen::Index k = 0; k < n; ++k)
                m(i, k) = cplx(row[std::size_t(k)][0].get<double>(),
                               row[std::size_t(k)][1].get<double>());
        }
        return MatrixRep(grid, std::move(m), j.value("hermitian", false));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config, std::string("bad matrix JSON: ") + e.what());
    }
}

inline json to_json(const WeylFit& f)
{
    json j;
    j["d"] = f.d;
    j["C_hat"] = num(f.c_hat);
    j["window"] = json::array({num(f.window_lo), num(f.window_hi)});
    j["residual"] = num(f.residual);
    return j;
}

// CSV with header "rank,value", ranks from 1.
inline std::string spectrum_csv(const std::vector<double>& values)
{
    std::string out = "rank,value\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        out += std::to_string(i + 1) + "," + fmt15(values[i]) + "\n";
    return out;
}

// One value per line; blank lines and lines starting with '#' are skipped.
inline std::vector<double> read_sequence(std::istream& in)
{
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        const auto last = line.find_last_not_of(" \t\r");
        try {
            out.push_back(
                detail::parse_number(std::string_view(line).substr(first, last - first + 1),
                                     "sequence value"));
        } catch (const Error& e) {
            throw Error(ErrorCode::config, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

} // namespace oslab::io

#endif // OSLAB_IO_HPP
