#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "../errors.hpp"
#include "../kepler.hpp"
#include "../scaled_real.hpp"
#include "contour.hpp"

namespace ertbp::melnikov {

/// Memo of c_q^{n,m} for one eccentricity.
class CoeffCache {
public:
    explicit CoeffCache(double e) : e_(e) { kepler::detail::check_eccentricity(e); }
    double e() const { return e_; }
    double operator()(int q, int n, int m) {
        const auto key = std::make_tuple(q, n, m);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        const double c = kepler::fourier_c(q, n, m, e_);
        memo_.emplace(key, c);
        return c;
    }

private:
    double e_;
    std::map<std::tuple<int, int, int>, double> memo_;
};

struct SeriesOptions {
    int l_max = 40;
    double tol = 1e-16;  // stop once a term is below tol * |partial sum|
    ContourSpec contour{};
};

struct LqkResult {
    ScaledReal value;
    ScaledReal truncation;  // geometric estimate of the discarded tail
    int terms = 0;
    bool converged = false;          // stopping rule met before l_max
    bool in_convergence_region = true;  // G^2 > 2(1+e) and eG < 1/4
};

inline bool in_convergence_region(double G, double e) { return G * G > 2.0 * (1.0 + e) && e * G < 0.25; }

/// L_{q,k} = sum_l c * N, the series for each sign of k as in the Fourier
/// expansion of Delta U_0 along the separatrix. Negative q uses L_{-q,-k} = L_{q,k}.
inline LqkResult L_qk_detailed(int q, int k, double G, CoeffCache& c, const SeriesOptions& opt = {}) {
    if (!(G > 0)) throw DomainError("L_qk: G must be positive");
    if (q < 0) return L_qk_detailed(-q, -k, G, c, opt);
    if (q == 0 && k < 0) k = -k;
    const int K = std::abs(k);
    const int l0 = k == 0 ? 1 : std::max(K, 2);

    LqkResult r;
    r.in_convergence_region = in_convergence_region(G, c.e());
    ScaledReal sum;
    ScaledReal prev_term;
    double ratio = 0;
    int small = 0;
    for (int l = l0; l <= opt.l_max; ++l) {
        int n_pow, m_c, mN, nN;
        if (k >= 0) {
            n_pow = 2 * l - K, m_c = -K, mN = l - K, nN = l;
        } else {
            n_pow = 2 * l - K, m_c = K, mN = l, nN = l - K;
        }
        const double coeff = c(q, n_pow, m_c);
        ScaledReal term;
        if (coeff != 0.0) term = N_eval(q, mN, nN, G, opt.contour) * coeff;
        sum += term;
        ++r.terms;
        if (!term.is_zero() && !prev_term.is_zero()) ratio = (term.abs() / prev_term.abs()).to_double();
        if (!term.is_zero()) prev_term = term;
        if (!sum.is_zero() && term.abs() <= sum.abs() * opt.tol) {
            // two quiet terms in a row, so an isolated small coefficient does not end the sum
            if (++small >= 2) {
                r.converged = true;
                break;
            }
        } else {
            small = 0;
        }
    }
    r.value = sum;
    if (!prev_term.is_zero())
        r.truncation = ratio < 1 ? prev_term.abs() * (ratio / (1 - ratio)) : prev_term.abs();
    return r;
}

inline ScaledReal L_qk(int q, int k, double G, double e, int l_max = 40, const ContourSpec& spec = {}) {
    CoeffCache c(e);
    SeriesOptions opt;
    opt.l_max = l_max;
    opt.contour = spec;
    return L_qk_detailed(q, k, G, c, opt).value;
}

struct TableMeta {
    double G = 0;
    double e = 0;
    int l_max = 40;
    double tol = 1e-16;
    int q_max = 0;
    int k_max = 0;
};

/// Fourier coefficients of the Melnikov potential in the exponential
/// convention: L = sum_{q,k} L_{q,k} e^{i(qs + k alpha)}. Entries are stored for
/// q = 0 with k >= 0 and for 1 <= q <= q_max with |k| <= k_max.
class HarmonicTable {
public:
    HarmonicTable() = default;
    explicit HarmonicTable(TableMeta meta) : meta_(meta) {}

    const TableMeta& meta() const { return meta_; }
    const std::map<std::pair<int, int>, ScaledReal>& entries() const { return entries_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    void set(int q, int k, const ScaledReal& v) {
        if (q < 0 || (q == 0 && k < 0)) throw DomainError("HarmonicTable: store q >= 0 and, for q = 0, k >= 0");
        entries_[{q, k}] = v;
        meta_.q_max = std::max(meta_.q_max, q);
        meta_.k_max = std::max(meta_.k_max, std::abs(k));
    }
    void warn(std::string w) { warnings_.push_back(std::move(w)); }

    bool has(int q, int k) const { return find(q, k) != nullptr; }

    ScaledReal at(int q, int k) const {
        const ScaledReal* v = find(q, k);
        if (!v) throw RangeError("HarmonicTable: no entry (" + std::to_string(q) + "," + std::to_string(k) + ")");
        return *v;
    }

    // Zero for missing entries.
    ScaledReal get(int q, int k) const {
        const ScaledReal* v = find(q, k);
        return v ? *v : ScaledReal();
    }

    HarmonicTable scaled(double factor) const {
        HarmonicTable t = *this;
        for (auto& [key, v] : t.entries_) v = v * factor;
        return t;
    }

    // Keep only the listed (q,k) entries.
    HarmonicTable restricted(const std::vector<std::pair<int, int>>& keys) const {
        HarmonicTable t(meta_);
        for (auto [q, k] : keys)
            if (has(q, k)) t.set(q, k, at(q, k));
        return t;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["meta"] = {{"G", meta_.G}, {"e", meta_.e}, {"l_max", meta_.l_max}, {"tol", meta_.tol},
                     {"q_max", meta_.q_max}, {"k_max", meta_.k_max}};
        j["entries"] = nlohmann::json::array();
        for (const auto& [key, v] : entries_)
            j["entries"].push_back({{"q", key.first}, {"k", key.second}, {"mantissa", v.mantissa()},
                                    {"log_factor", v.log_factor()}});
        if (!warnings_.empty()) j["warnings"] = warnings_;
        return j;
    }

    static HarmonicTable from_json(const nlohmann::json& j) {
        try {
            TableMeta m;
            const auto& jm = j.at("meta");
            m.G = jm.at("G").get<double>();
            m.e = jm.at("e").get<double>();
            m.l_max = jm.at("l_max").get<int>();
            m.tol = jm.at("tol").get<double>();
            HarmonicTable t(m);
            for (const auto& en : j.at("entries"))
                t.set(en.at("q").get<int>(), en.at("k").get<int>(),
                      ScaledReal(en.at("mantissa").get<double>(), en.at("log_factor").get<double>()));
            if (j.contains("warnings"))
                for (const auto& w : j["warnings"]) t.warn(w.get<std::string>());
            return t;
        } catch (const nlohmann::json::exception& ex) {
            throw IoError(std::string("HarmonicTable: malformed JSON: ") + ex.what());
        }
    }

private:
    const ScaledReal* find(int q, int k) const {
        if (q < 0) q = -q, k = -k;
        if (q == 0 && k < 0) k = -k;
        auto it = entries_.find({q, k});
        return it == entries_.end() ? nullptr : &it->second;
    }

    TableMeta meta_;
    std::map<std::pair<int, int>, ScaledReal> entries_;
    std::vector<std::string> warnings_;
};

/// Table of L_{q,k} from the series pipeline.
inline HarmonicTable compute_table(double G, double e, int q_max, int k_max, const SeriesOptions& opt = {}) {
    if (q_max < 0 || k_max < 0) throw DomainError("compute_table: negative range");
    TableMeta meta{G, e, opt.l_max, opt.tol, q_max, k_max};
    HarmonicTable t(meta);
    CoeffCache c(e);
    if (!in_convergence_region(G, e))
        t.warn("outside the convergence region G^2 > 2(1+e), eG < 1/4: series tails may diverge");
    for (int q = 0; q <= q_max; ++q) {
        std::vector<std::pair<int, LqkResult>> row;
        ScaledReal row_max;
        for (int k = q == 0 ? 0 : -k_max; k <= k_max; ++k) {
            row.emplace_back(k, L_qk_detailed(q, k, G, c, opt));
            if (row.back().second.value.abs() > row_max) row_max = row.back().second.value.abs();
        }
        // a truncated tail only matters against the largest harmonic of its row
        for (const auto& [k, r] : row) {
            t.set(q, k, r.value);
            if (!r.converged && r.truncation > row_max * 1e-13)
                t.warn("L(" + std::to_string(q) + "," + std::to_string(k) + ") truncated at l_max");
        }
    }
    return t;
}

namespace detail {

inline std::string cache_key(double G, double e, int l_max, int q_max, int k_max) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%a|%a|%d|%d|%d", G, e, l_max, q_max, k_max);
    char name[64];
    std::snprintf(name, sizeof name, "table_%016zx.json", std::hash<std::string>{}(buf));
    return name;
}

}  // namespace detail

/// Directory for cached tables: ERTBP_CACHE_DIR if set, otherwise none.
inline std::optional<std::filesystem::path> default_cache_dir() {
    if (const char* d = std::getenv("ERTBP_CACHE_DIR"); d && *d) return std::filesystem::path(d);
    return std::nullopt;
}

/// compute_table with an on-disk cache keyed by (G, e, l_max, range).
inline HarmonicTable cached_table(double G, double e, int q_max, int k_max, const SeriesOptions& opt,
                                  const std::optional<std::filesystem::path>& dir) {
    if (!dir) return compute_table(G, e, q_max, k_max, opt);
    const auto file = *dir / detail::cache_key(G, e, opt.l_max, q_max, k_max);
    if (std::filesystem::exists(file)) {
        std::ifstream in(file);
        nlohmann::json j;
        try {
            in >> j;
            HarmonicTable t = HarmonicTable::from_json(j);
            if (t.meta().G == G && t.meta().e == e) return t;
        } catch (const std::exception&) {
            // unreadable cache entries are recomputed
        }
    }
    HarmonicTable t = compute_table(G, e, q_max, k_max, opt);
    std::error_code ec;
    std::filesystem::create_directories(*dir, ec);
    std::ofstream out(file);
    if (!out) throw IoError("cannot write cache file " + file.string());
    out << t.to_json().dump(1);
    return t;
}

/// One block of the split L = L_0 + L_1 + L_2 + ...
struct SeriesBlock {
    ScaledReal value, d_alpha, d_s, d_ss;
};

struct SeriesValue {
    std::vector<SeriesBlock> blocks;  // index q
    ScaledReal value, d_alpha, d_s, d_ss;

    double to_double() const { return value.to_double(); }
};

/// L(alpha, s) = L00 + 2 sum_{k>=1} L0k cos k alpha + 2 sum_{q>=1} sum_k Lqk cos(qs + k alpha),
/// with term-wise partial derivatives. q_max < 0 uses every row of the table.
inline SeriesValue series_eval(const HarmonicTable& table, double alpha, double s, int q_max = -1) {
    if (table.entries().empty()) throw RangeError("series_eval: empty table");
    if (q_max > table.meta().q_max) throw RangeError("series_eval: table has no row q = " + std::to_string(q_max));
    const int Q = q_max < 0 ? table.meta().q_max : q_max;
    SeriesValue out;
    out.blocks.resize(Q + 1);
    for (const auto& [key, L] : table.entries()) {
        const auto [q, k] = key;
        if (q > Q) continue;
        SeriesBlock& b = out.blocks[q];
        const double ph = q * s + k * alpha;
        const double w = (q == 0 && k == 0) ? 1.0 : 2.0;
        const double cs = std::cos(ph), sn = std::sin(ph);
        b.value += L * (w * cs);
        b.d_alpha += L * (-w * k * sn);
        b.d_s += L * (-w * q * sn);
        b.d_ss += L * (-w * q * q * cs);
    }
    for (const auto& b : out.blocks) {
        out.value += b.value;
        out.d_alpha += b.d_alpha;
        out.d_s += b.d_s;
        out.d_ss += b.d_ss;
    }
    return out;
}

/// dL_{q,k}/dG by Richardson-extrapolated central differences of L e^{qG^3/3}
/// (the exponential factor is differentiated exactly). Needs a table builder.
inline HarmonicTable table_derivative_G(const std::function<HarmonicTable(double)>& build, double G,
                                        double rel_step = 1e-4) {
    const double h = rel_step * G;
    const HarmonicTable t0 = build(G);
    const HarmonicTable tp1 = build(G + h), tm1 = build(G - h), tp2 = build(G + 2 * h), tm2 = build(G - 2 * h);
    HarmonicTable d(t0.meta());
    for (const auto& [key, v] : t0.entries()) {
        const int q = key.first;
        const double shift = -q * G * G * G / 3.0;
        auto g = [&](const HarmonicTable& t, double Gs) {
            // L e^{q Gs^3/3}, returned relative to the scale e^{shift} at G
            return t.get(key.first, key.second).to_double_scaled(-q * Gs * Gs * Gs / 3.0);
        };
        const double g0 = g(t0, G);
        const double dg = (8.0 * (g(tp1, G + h) - g(tm1, G - h)) - (g(tp2, G + 2 * h) - g(tm2, G - 2 * h))) / (12.0 * h);
        d.set(key.first, key.second, ScaledReal(dg - q * G * G * g0, shift));
    }
    return d;
}

}  // namespace ertbp::melnikov
