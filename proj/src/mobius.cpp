#include "srmcal/mobius.hpp"

namespace srmcal {

complex mobius_apply(const matrix2& m, const complex& z, double floor) {
    const complex den = m.e21 * z + m.e22;
    if (std::abs(den) < floor) {
        throw pole_input("mobius_apply: input at transformation pole");
    }
    return (m.e11 * z + m.e12) / den;
}

matrix2 mobius_inverse(const matrix2& m, double det_floor) {
    if (std::abs(m.det()) < det_floor) {
        throw singular_matrix("mobius_inverse: |det| below floor");
    }
    return {m.e22, -m.e12, -m.e21, m.e11};
}

cross_map_result solve_cross_map(const std::vector<reflection_pair>& pairs,
                                 const cross_map_options& opts) {
    if (pairs.size() < 3) {
        throw rank_deficient("solve_cross_map: need at least 3 load pairs, got " +
                             std::to_string(pairs.size()));
    }
    // At least three loads must be electrically unique; surplus duplicates
    // only add least-squares redundancy.
    std::vector<complex> kept;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (!is_finite(pairs[i].left) || !is_finite(pairs[i].right)) {
            throw numerical_error("solve_cross_map: non-finite reflection value");
        }
        bool unique = true;
        for (const complex& seen : kept) {
            if (std::abs(pairs[i].left - seen) < opts.min_load_separation) {
                unique = false;
                break;
            }
        }
        if (unique) kept.push_back(pairs[i].left);
    }
    if (kept.size() < 3) {
        throw rank_deficient("solve_cross_map: only " +
                             std::to_string(kept.size()) +
                             " electrically distinct loads, need at least 3");
    }

    std::vector<std::array<complex, 4>> rows;
    rows.reserve(pairs.size());
    for (const reflection_pair& p : pairs) {
        rows.push_back({-p.right, complex{-1.0, 0.0}, p.right * p.left, p.left});
    }

    const nullspace_result ns = smallest_singular_vector(rows);
    if (ns.rank_gap < opts.rank_tol) {
        throw rank_deficient(
            "solve_cross_map: system rank below 3 (s3/s1 = " +
            std::to_string(ns.rank_gap) + "), loads not unique enough");
    }

    cross_map_result out;
    out.h = {ns.vector[0], ns.vector[1], ns.vector[2], ns.vector[3]};
    out.quality = ns.quality;
    out.rank_gap = ns.rank_gap;
    out.singular_values = ns.singular_values;
    return out;
}

} // namespace srmcal
