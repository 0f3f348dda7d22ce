#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "psv/norms.hpp"
#include "psv/weights.hpp"

namespace psv {

/// A member cube of a sparse family with its explicit witness set E_R
/// (linear cell ids, sorted) and the averages the stopping conditions and
/// domination sums are built from.
struct SparseMember {
    DyadicIndex idx;
    std::vector<std::int64_t> witness;
    double avg_osc = 0.0;    // <|f - <f>_R|>_R
    double avg_frac3 = 0.0;  // <f_{3R}^{s,r}>_R, fractional construction only
};

struct SparseFamily {
    Cube cube;
    std::int64_t n = 1;
    double threshold = 4.0;  // the stopping constant
    std::vector<SparseMember> members;
};

/// Verifies witness disjointness and |E_R| >= |R|/2 exactly in integer cell
/// counts. Returns the smallest witness ratio alongside.
inline std::pair<bool, double> sparsity_check(const SparseFamily& s) {
    std::int64_t total = s.cube.dim == 2 ? s.n * s.n : s.n;
    std::vector<char> seen(static_cast<std::size_t>(total), 0);
    bool ok = true;
    double min_ratio = 1.0;
    for (const auto& m : s.members) {
        std::int64_t side = s.n >> m.idx.generation;
        std::int64_t cube_cells = s.cube.dim == 2 ? side * side : side;
        std::int64_t have = static_cast<std::int64_t>(m.witness.size());
        if (2 * have < cube_cells) ok = false;
        min_ratio = std::min(min_ratio,
                             static_cast<double>(have) / static_cast<double>(cube_cells));
        for (std::int64_t id : m.witness) {
            if (id < 0 || id >= total || seen[static_cast<std::size_t>(id)]) {
                ok = false;
                continue;
            }
            seen[static_cast<std::size_t>(id)] = 1;
        }
    }
    return {ok, min_ratio};
}

namespace detail {

inline std::int64_t cell_id(const GridFunction& f, std::int64_t ix, std::int64_t iy) {
    return iy * f.n + ix;
}

/// Mean of |f - c| over a dyadic block (all cells inside the grid).
inline double centered_abs_mean(const GridFunction& f, const CellBlock& b, double c) {
    KahanSum acc;
    for (std::int64_t iy = b.y0; iy < b.y1; ++iy)
        for (std::int64_t ix = b.x0; ix < b.x1; ++ix)
            acc.add(std::abs((f.cube.dim == 2 ? f.at(ix, iy) : f.at(ix)) - c));
    return acc.value() / static_cast<double>(b.cell_count());
}

/// Mean of a field stored relative to a base block over a sub-block.
inline double field_mean(const std::vector<double>& field, const CellBlock& base,
                         const CellBlock& sub) {
    std::int64_t bw = base.x1 - base.x0;
    KahanSum acc;
    for (std::int64_t iy = sub.y0; iy < sub.y1; ++iy)
        for (std::int64_t ix = sub.x0; ix < sub.x1; ++ix)
            acc.add(field[static_cast<std::size_t>((iy - base.y0) * bw + (ix - base.x0))]);
    return acc.value() / static_cast<double>(sub.cell_count());
}

/// Collects the maximal dyadic descendants of `root` (strictly below it, at
/// generations <= max_gen) satisfying `stops`; descends past non-stopping
/// cubes.
template <typename Pred>
void maximal_stopping_cubes(const GridFunction& f, const DyadicIndex& root, int max_gen,
                            Pred&& stops, std::vector<DyadicIndex>& out) {
    if (root.generation >= max_gen) return;
    for (const auto& child : dyadic_children(root, f.cube.dim)) {
        if (stops(child))
            out.push_back(child);
        else
            maximal_stopping_cubes(f, child, max_gen, stops, out);
    }
}

inline std::vector<std::int64_t> witness_cells(const GridFunction& f, const DyadicIndex& r,
                                               const std::vector<DyadicIndex>& children) {
    CellBlock rb = block_of(f, r);
    std::vector<std::int64_t> out;
    for (std::int64_t iy = rb.y0; iy < rb.y1; ++iy)
        for (std::int64_t ix = rb.x0; ix < rb.x1; ++ix) {
            bool covered = false;
            for (const auto& c : children) {
                CellBlock cb = block_of(f, c);
                if (ix >= cb.x0 && ix < cb.x1 && iy >= cb.y0 && iy < cb.y1) {
                    covered = true;
                    break;
                }
            }
            if (!covered) out.push_back(cell_id(f, ix, iy));
        }
    return out;
}

}  // namespace detail

/// Stopping-time family for the oscillation domination: children of a member
/// R are the maximal dyadic S with <|f - <f>_R|>_S > 4 <|f - <f>_R|>_R.
/// The threshold-4 argument gives sum|children| <= |R|/4, so every witness
/// keeps at least half of R.
inline SparseFamily oscillation_sparse(const GridFunction& f, int max_gen) {
    if (max_gen > f.max_generation())
        throw std::invalid_argument("oscillation_sparse: max_gen exceeds grid depth");
    SparseFamily fam;
    fam.cube = f.cube;
    fam.n = f.n;
    std::deque<DyadicIndex> queue{DyadicIndex(0, 0, 0)};
    while (!queue.empty()) {
        DyadicIndex r = queue.front();
        queue.pop_front();
        CellBlock rb = block_of(f, r);
        double mean_r = block_mean(f, rb);
        double avg_r = detail::centered_abs_mean(f, rb, mean_r);
        std::vector<DyadicIndex> children;
        detail::maximal_stopping_cubes(
            f, r, max_gen,
            [&](const DyadicIndex& s) {
                return detail::centered_abs_mean(f, block_of(f, s), mean_r) >
                       fam.threshold * avg_r;
            },
            children);
        SparseMember m;
        m.idx = r;
        m.avg_osc = avg_r;
        m.witness = detail::witness_cells(f, r, children);
        fam.members.push_back(std::move(m));
        for (const auto& c : children) queue.push_back(c);
    }
    return fam;
}

/// Stopping-time family for the fractional sparse domination. Children of R
/// are the maximal dyadic S satisfying at least one of
///   <f_{3R}^{s,r}>_S   > 4 <f_{3R}^{s,r}>_R,
///   <|f - <f>_R|>_S    > 4 <|f - <f>_R|>_R,
/// where the 3-fold dilate is sampled through the reflective extension. Each
/// condition removes at most |R|/4, so witnesses keep at least half of R.
inline SparseFamily fractional_sparse(const GridFunction& f, const ExponentConfig& cfg,
                                      int max_gen) {
    if (max_gen > f.max_generation())
        throw std::invalid_argument("fractional_sparse: max_gen exceeds grid depth");
    SparseFamily fam;
    fam.cube = f.cube;
    fam.n = f.n;
    detail::KernelTable kt(f.cube.dim, f.cell_size(), cfg.s, cfg.r, 3 * f.n);
    std::deque<DyadicIndex> queue{DyadicIndex(0, 0, 0)};
    while (!queue.empty()) {
        DyadicIndex r = queue.front();
        queue.pop_front();
        CellBlock rb = block_of(f, r);
        auto frac = difference_quotient_field(f, rb, block_of_dilate3(f, r), cfg.s, cfg.r, kt);
        double mean_r = block_mean(f, rb);
        double avg_frac = detail::field_mean(frac, rb, rb);
        double avg_osc = detail::centered_abs_mean(f, rb, mean_r);
        std::vector<DyadicIndex> children;
        detail::maximal_stopping_cubes(
            f, r, max_gen,
            [&](const DyadicIndex& s) {
                CellBlock sb = block_of(f, s);
                if (detail::field_mean(frac, rb, sb) > fam.threshold * avg_frac) return true;
                return detail::centered_abs_mean(f, sb, mean_r) > fam.threshold * avg_osc;
            },
            children);
        SparseMember m;
        m.idx = r;
        m.avg_osc = avg_osc;
        m.avg_frac3 = avg_frac;
        m.witness = detail::witness_cells(f, r, children);
        fam.members.push_back(std::move(m));
        for (const auto& c : children) queue.push_back(c);
    }
    return fam;
}

/// Sparse operator A_S^{r,beta} f = (sum over members containing x of
/// (|R|^beta <|f|>_R)^r)^{1/r}.
inline GridFunction sparse_operator(const SparseFamily& s, const GridFunction& f, double r,
                                    double beta) {
    if (!(r > 0.0)) throw std::invalid_argument("sparse_operator: requires r > 0");
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("sparse_operator: requires beta in [0,1)");
    GridFunction acc(f.cube, f.n);
    for (const auto& m : s.members) {
        CellBlock b = block_of(f, m.idx);
        double vol = f.cube.volume() * std::ldexp(1.0, -m.idx.generation * f.cube.dim);
        double term = std::pow(std::pow(vol, beta) * block_p_average(f, b, 1.0), r);
        for (std::int64_t iy = b.y0; iy < b.y1; ++iy)
            for (std::int64_t ix = b.x0; ix < b.x1; ++ix)
                acc.at(ix, iy) += term;
    }
    for (double& v : acc.samples) v = std::pow(v, 1.0 / r);
    return acc;
}

/// Local fractional maximal operator M_Q^beta f: pointwise max of
/// |R|^beta <|f|>_R over the dyadic ancestors of each cell, generations
/// 0..max_gen.
inline GridFunction fractional_maximal(const GridFunction& f, double beta, int max_gen) {
    if (!(beta >= 0.0 && beta < 1.0))
        throw std::invalid_argument("fractional_maximal: requires beta in [0,1)");
    if (max_gen > f.max_generation())
        throw std::invalid_argument("fractional_maximal: max_gen exceeds grid depth");
    detail::BlockSums sums(f, max_gen, [](double v) { return std::abs(v); });
    GridFunction out(f.cube, f.n);
    std::int64_t rows = f.cube.dim == 2 ? f.n : 1;
    for (std::int64_t iy = 0; iy < rows; ++iy)
        for (std::int64_t ix = 0; ix < f.n; ++ix) {
            double best = 0.0;
            for (int g = 0; g <= max_gen; ++g) {
                std::int64_t side = f.n >> g;
                DyadicIndex idx(g, ix / side, f.cube.dim == 2 ? iy / side : 0);
                double vol = f.cube.volume() * std::ldexp(1.0, -g * f.cube.dim);
                best = std::max(best, std::pow(vol, beta) * sums.mean(idx));
            }
            out.at(ix, iy) = best;
        }
    return out;
}

/// Measured pointwise-domination record: the largest constant the inequality
/// under test needs, cellwise ratios (0/0 counted as 1), and the family.
struct DominationReport {
    double max_required_constant = 0.0;
    GridFunction per_cell_ratios;
    SparseFamily family;
};

namespace detail {

inline SparseFamily empty_family(const GridFunction& f) {
    SparseFamily fam;
    fam.cube = f.cube;
    fam.n = f.n;
    return fam;
}

inline DominationReport domination_from(const GridFunction& target, const GridFunction& dom,
                                        const SparseFamily& fam) {
    DominationReport rep;
    rep.per_cell_ratios = GridFunction(target.cube, target.n);
    rep.family = fam;
    double worst = 0.0;
    for (std::size_t i = 0; i < target.samples.size(); ++i) {
        double t = target.samples[i], d = dom.samples[i];
        double ratio = (t == 0.0 && d == 0.0) ? 1.0 : t / d;
        rep.per_cell_ratios.samples[i] = ratio;
        worst = std::max(worst, ratio);
    }
    rep.max_required_constant = worst;
    return rep;
}

}  // namespace detail

/// |f(x) - <f>_Q| against the oscillation sparse sum of Lemma-style averages.
inline DominationReport verify_oscillation_domination(const GridFunction& f,
                                                      const SparseFamily& s) {
    GridFunction target(f.cube, f.n);
    double mean_q = block_mean(f, whole_block(f));
    for (std::size_t i = 0; i < f.samples.size(); ++i)
        target.samples[i] = std::abs(f.samples[i] - mean_q);
    GridFunction dom(f.cube, f.n);
    for (const auto& m : s.members) {
        CellBlock b = block_of(f, m.idx);
        for (std::int64_t iy = b.y0; iy < b.y1; ++iy)
            for (std::int64_t ix = b.x0; ix < b.x1; ++ix)
                dom.at(ix, iy) += m.avg_osc;
    }
    return detail::domination_from(target, dom, s);
}

/// f_Q^{s,r}(x) against the fractional sparse dominating sum
/// sum_R ( <f_{3R}^{s,r}>_R + s^{-1-1/r} l(R)^{-s} <|f - <f>_R|>_R ) 1_R(x).
inline DominationReport verify_fractional_domination(const GridFunction& f,
                                                     const ExponentConfig& cfg,
                                                     const SparseFamily& s) {
    detail::KernelTable kt(f.cube.dim, f.cell_size(), cfg.s, cfg.r, f.n);
    auto target_field =
        difference_quotient_field(f, whole_block(f), whole_block(f), cfg.s, cfg.r, kt);
    GridFunction target(f.cube, f.n);
    target.samples = target_field;
    GridFunction dom(f.cube, f.n);
    double spow = std::pow(cfg.s, 1.0 + 1.0 / cfg.r);
    for (const auto& m : s.members) {
        CellBlock b = block_of(f, m.idx);
        double side = f.cube.side * std::ldexp(1.0, -m.idx.generation);
        double term = m.avg_frac3 + m.avg_osc / (spow * std::pow(side, cfg.s));
        for (std::int64_t iy = b.y0; iy < b.y1; ++iy)
            for (std::int64_t ix = b.x0; ix < b.x1; ++ix)
                dom.at(ix, iy) += term;
    }
    return detail::domination_from(target, dom, s);
}

/// f_Q^{s,r}(x) against the two dyadic square-function-type dominators of the
/// subcritical estimate (3R terms through reflection):
///   ( sum_R l(R)^{-sr} |f(x) - <f>_R|^r 1_R )^{1/r}
/// + ( sum_R l(R)^{-sr} <|f - <f>_{3R}|>_{r,3R}^r 1_R )^{1/r}.
inline DominationReport verify_subcritical_tl_domination(const GridFunction& f,
                                                         const ExponentConfig& cfg, int depth) {
    if (depth > f.max_generation())
        throw std::invalid_argument("verify_subcritical_tl_domination: depth exceeds grid");
    detail::KernelTable kt(f.cube.dim, f.cell_size(), cfg.s, cfg.r, f.n);
    auto target_field =
        difference_quotient_field(f, whole_block(f), whole_block(f), cfg.s, cfg.r, kt);
    GridFunction target(f.cube, f.n);
    target.samples = target_field;

    double sr = cfg.s * cfg.r;
    GridFunction term1(f.cube, f.n), term2(f.cube, f.n);
    for (int g = 0; g <= depth; ++g) {
        std::int64_t m = std::int64_t{1} << g;
        double side = f.cube.side * std::ldexp(1.0, -g);
        double scale = std::pow(side, -sr);
        for (std::int64_t cy = 0; cy < (f.cube.dim == 2 ? m : 1); ++cy)
            for (std::int64_t cx = 0; cx < m; ++cx) {
                DyadicIndex idx(g, cx, cy);
                CellBlock b = block_of(f, idx);
                double mean_r = block_mean(f, b);
                CellBlock b3 = block_of_dilate3(f, idx);
                double mean_3r = block_mean(f, b3);
                double avg_r3 = block_p_average_centered(f, b3, cfg.r, mean_3r);
                double t2 = scale * std::pow(avg_r3, cfg.r);
                for (std::int64_t iy = b.y0; iy < b.y1; ++iy)
                    for (std::int64_t ix = b.x0; ix < b.x1; ++ix) {
                        term1.at(ix, iy) +=
                            scale * detail::pow_r(std::abs(f.at(ix, iy) - mean_r), cfg.r);
                        term2.at(ix, iy) += t2;
                    }
            }
    }
    GridFunction dom(f.cube, f.n);
    for (std::size_t i = 0; i < dom.samples.size(); ++i)
        dom.samples[i] = std::pow(term1.samples[i], 1.0 / cfg.r) +
                         std::pow(term2.samples[i], 1.0 / cfg.r);
    return detail::domination_from(target, dom, detail::empty_family(f));
}

enum class SparseBoundMode { strong, weak };

/// Measured constant of the sparse-form weighted bound: the L^q_w (strong)
/// or weak-L^q_w norm of A_S^{r,beta} f divided by the characteristic and
/// A_infinity powers the estimate prescribes, times ||f||_{L^p_s}.
inline double sparse_bound_ratio(const SparseFamily& s, const GridFunction& f,
                                 const GridFunction& omega, const GridFunction& sigma,
                                 const ExponentConfig& cfg, SparseBoundMode mode, int depth) {
    cfg.validate();
    double beta = cfg.beta();
    GridFunction a = sparse_operator(s, f, cfg.r, beta);
    double char_apq = apq_alpha(omega, sigma, cfg, depth).value;
    double denom_norm = lp_norm(f, sigma, cfg.p);

    GridFunction wq = omega;
    for (double& v : wq.samples) v = std::pow(v, cfg.q);

    double factor;
    if (mode == SparseBoundMode::strong) {
        if (!(cfg.p > 1.0))
            throw std::invalid_argument("sparse_bound_ratio: strong-type estimate requires p > 1");
        GridFunction sp = sigma;
        double pc = cfg.p_conj();
        for (double& v : sp.samples) v = std::pow(v, -pc);
        double ai_sigma = ainfty(sp, depth).value;
        if (cfg.p <= cfg.r) {
            factor = std::pow(ai_sigma, 1.0 / cfg.q);
        } else {
            double ai_omega = ainfty(wq, depth).value;
            double pw = std::pow(ai_omega, 1.0 / cfg.r - 1.0 / cfg.p);
            double sw = std::pow(ai_sigma, 1.0 / cfg.q);
            factor = (cfg.p < cfg.q || beta == 0.0) ? pw + sw : pw * sw;
        }
        return lp_norm(a, omega, cfg.q) / (char_apq * factor * denom_norm);
    }
    double ai_omega = ainfty(wq, depth).value;
    if (cfg.r == 1.0 && cfg.p > 1.0 && (cfg.p < cfg.q || beta == 0.0))
        factor = std::pow(ai_omega, 1.0 / cfg.p_conj());
    else
        factor = std::pow(ai_omega, 1.0 / cfg.r);
    return weak_lp_norm(a, omega, cfg.q) / (char_apq * factor * denom_norm);
}

/// Serialization used by the CLI: witnesses compressed to [a,b) id ranges.
inline nlohmann::json to_json(const SparseFamily& s) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : s.members) {
        nlohmann::json ranges = nlohmann::json::array();
        std::size_t i = 0;
        while (i < m.witness.size()) {
            std::size_t j = i;
            while (j + 1 < m.witness.size() && m.witness[j + 1] == m.witness[j] + 1) ++j;
            ranges.push_back({m.witness[i], m.witness[j] + 1});
            i = j + 1;
        }
        members.push_back({{"generation", m.idx.generation},
                           {"coords", {m.idx.coords[0], m.idx.coords[1]}},
                           {"witness_cell_ranges", ranges},
                           {"avg_osc", m.avg_osc},
                           {"avg_frac3", m.avg_frac3}});
    }
    return nlohmann::json{{"n", s.n},
                          {"dim", s.cube.dim},
                          {"threshold", s.threshold},
                          {"members", members}};
}

inline SparseFamily sparse_family_from_json(const nlohmann::json& j, const Cube& cube) {
    SparseFamily s;
    s.cube = cube;
    s.n = j.at("n").get<std::int64_t>();
    s.threshold = j.at("threshold").get<double>();
    for (const auto& jm : j.at("members")) {
        SparseMember m;
        m.idx.generation = jm.at("generation").get<int>();
        m.idx.coords[0] = jm.at("coords")[0].get<std::int64_t>();
        m.idx.coords[1] = jm.at("coords")[1].get<std::int64_t>();
        for (const auto& range : jm.at("witness_cell_ranges"))
            for (std::int64_t id = range[0].get<std::int64_t>(); id < range[1].get<std::int64_t>(); ++id)
                m.witness.push_back(id);
        m.avg_osc = jm.at("avg_osc").get<double>();
        m.avg_frac3 = jm.at("avg_frac3").get<double>();
        s.members.push_back(std::move(m));
    }
    return s;
}

}  // namespace psv
