#include "srmcal/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace srmcal {

nullspace_result smallest_singular_vector(
    const std::vector<std::array<complex, 4>>& rows) {
    const auto m = static_cast<Eigen::Index>(rows.size());
    if (m < 3) {
        throw rank_deficient("nullspace solve needs at least 3 rows");
    }
    Eigen::MatrixXcd g(m, 4);
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < 4; ++c) {
            const complex& z = rows[static_cast<std::size_t>(r)]
                                   [static_cast<std::size_t>(c)];
            if (!is_finite(z)) {
                throw numerical_error("nullspace solve: non-finite row entry");
            }
            g(r, c) = z;
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();

    nullspace_result out;
    for (int i = 0; i < 4; ++i) {
        out.singular_values[static_cast<std::size_t>(i)] =
            i < sv.size() ? sv(i) : 0.0;
    }
    const Eigen::VectorXcd v = svd.matrixV().col(3);
    for (int i = 0; i < 4; ++i) {
        out.vector[static_cast<std::size_t>(i)] = v(i);
    }
    const double s1 = out.singular_values[0];
    const double s3 = out.singular_values[2];
    const double s4 = out.singular_values[3];
    out.quality = s3 > 0.0 ? s4 / s3 : 0.0;
    out.rank_gap = s1 > 0.0 ? s3 / s1 : 0.0;
    return out;
}

eigen2_result eigen2(const matrix2& m) {
    const complex tr = m.e11 + m.e22;
    const complex disc = std::sqrt(tr * tr - 4.0 * m.det());
    eigen2_result out;
    out.lambda1 = 0.5 * (tr + disc);
    out.lambda2 = 0.5 * (tr - disc);

    // (M - lambda I) v = 0; take the better-conditioned row.
    auto vector_for = [&](const complex& lambda, complex& first,
                          complex& second) {
        const complex r1a = m.e11 - lambda;
        const complex r2b = m.e22 - lambda;
        const double row1 = std::abs(r1a) + std::abs(m.e12);
        const double row2 = std::abs(m.e21) + std::abs(r2b);
        if (row1 >= row2) {
            first = m.e12;
            second = -r1a;
        } else {
            first = -r2b;
            second = m.e21;
        }
        if (std::abs(first) == 0.0 && std::abs(second) == 0.0) {
            // Scalar multiple of identity; any vector is an eigenvector.
            first = 1.0;
            second = 0.0;
        }
    };
    vector_for(out.lambda1, out.v1_first, out.v1_second);
    vector_for(out.lambda2, out.v2_first, out.v2_second);
    return out;
}

} // namespace srmcal
