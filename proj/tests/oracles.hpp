#ifndef BCTSNE_TESTS_ORACLES_HPP
#define BCTSNE_TESTS_ORACLES_HPP

// Brute-force reference implementations used only by the tests. They work on plain nested
// vectors and deliberately avoid the library's code paths (no Eigen, no shared helpers).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "boost/math/tools/roots.hpp"

#include "bctsne/matrix.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const bctsne::Matrix& m) {
    Dense out(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out[i][j] = m(i, j);
        }
    }
    return out;
}

inline bctsne::Matrix from_dense(const Dense& d) {
    bctsne::Matrix out(d.size(), d.empty() ? 0 : d[0].size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d[i].size(); ++j) {
            out(i, j) = d[i][j];
        }
    }
    return out;
}

inline Dense transpose(const Dense& a) {
    if (a.empty()) {
        return {};
    }
    Dense out(a[0].size(), std::vector<double>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[0].size(); ++j) {
            out[j][i] = a[i][j];
        }
    }
    return out;
}

inline Dense multiply(const Dense& a, const Dense& b) {
    Dense out(a.size(), std::vector<double>(b.empty() ? 0 : b[0].size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < b.size(); ++k) {
            for (std::size_t j = 0; j < b[0].size(); ++j) {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    return out;
}

inline bctsne::Matrix random_matrix(std::size_t n, std::size_t p, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sd);
    bctsne::Matrix out(n, p);
    for (auto& v : out.values()) {
        v = normal(rng);
    }
    return out;
}

/**
 * Singular values and vectors by one-sided Jacobi rotations on a copy of `A` (any shape).
 * Returns full thin factors sorted by decreasing singular value.
 */
struct Svd {
    Dense U;
    std::vector<double> S;
    Dense V;
};

inline Svd jacobi_svd(const Dense& A_in) {
    bool flipped = A_in.size() < A_in[0].size();
    Dense A = flipped ? transpose(A_in) : A_in;
    const std::size_t m = A.size(), n = A[0].size();
    Dense V(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        V[i][i] = 1;
    }

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0, beta = 0, gamma = 0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += A[i][p] * A[i][p];
                    beta += A[i][q] * A[i][q];
                    gamma += A[i][p] * A[i][q];
                }
                if (alpha == 0 || beta == 0) {
                    continue;
                }
                off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
                if (std::abs(gamma) < 1e-300) {
                    continue;
                }
                double zeta = (beta - alpha) / (2 * gamma);
                double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1 + zeta * zeta));
                double c = 1 / std::sqrt(1 + t * t), s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    double ap = A[i][p], aq = A[i][q];
                    A[i][p] = c * ap - s * aq;
                    A[i][q] = s * ap + c * aq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double vp = V[i][p], vq = V[i][q];
                    V[i][p] = c * vp - s * vq;
                    V[i][q] = s * vp + c * vq;
                }
            }
        }
        if (off < 1e-15) {
            break;
        }
    }

    std::vector<double> S(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < m; ++i) {
            s += A[i][j] * A[i][j];
        }
        S[j] = std::sqrt(s);
    }
    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < n; ++j) {
        order[j] = j;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return S[a] > S[b]; });

    Svd out;
    out.U.assign(m, std::vector<double>(n));
    out.V.assign(n, std::vector<double>(n));
    out.S.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t j = order[k];
        out.S[k] = S[j];
        for (std::size_t i = 0; i < m; ++i) {
            out.U[i][k] = S[j] > 0 ? A[i][j] / S[j] : 0.0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            out.V[i][k] = V[i][j];
        }
    }
    if (flipped) {
        std::swap(out.U, out.V);
    }
    return out;
}

/// Gauss-Jordan inverse with partial pivoting.
inline Dense inverse(Dense a) {
    const std::size_t n = a.size();
    Dense inv(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        inv[i][i] = 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) {
                piv = r;
            }
        }
        if (a[piv][c] == 0) {
            throw std::runtime_error("oracle::inverse: singular matrix");
        }
        std::swap(a[c], a[piv]);
        std::swap(inv[c], inv[piv]);
        double d = a[c][c];
        for (std::size_t j = 0; j < n; ++j) {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) {
                continue;
            }
            double f = a[r][c];
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    return inv;
}

/// beta = (Z^T Z)^{-1} Z^T Y.
inline Dense normal_equations(const Dense& Z, const Dense& Y) {
    Dense Zt = transpose(Z);
    return multiply(inverse(multiply(Zt, Z)), multiply(Zt, Y));
}

/// (I - Z (Z^T Z)^{-1} Z^T) Y.
inline Dense hat_residual(const Dense& Z, const Dense& Y) {
    Dense Zt = transpose(Z);
    Dense H = multiply(multiply(Z, inverse(multiply(Zt, Z))), Zt);
    Dense HY = multiply(H, Y);
    Dense out = Y;
    for (std::size_t i = 0; i < Y.size(); ++i) {
        for (std::size_t j = 0; j < Y[0].size(); ++j) {
            out[i][j] -= HY[i][j];
        }
    }
    return out;
}

inline Dense naive_sqdist(const Dense& A) {
    const std::size_t n = A.size();
    Dense D(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0;
            for (std::size_t c = 0; c < A[i].size(); ++c) {
                s += (A[i][c] - A[j][c]) * (A[i][c] - A[j][c]);
            }
            D[i][j] = s;
        }
    }
    return D;
}

/// Input affinities transcribed literally: conditionals with sigma_i, then (p_{j|i} + p_{i|j}) / 2n.
inline Dense literal_input_affinities(const Dense& X, const std::vector<double>& sigma2) {
    const std::size_t n = X.size();
    Dense D = naive_sqdist(X);
    Dense cond(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double denom = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) {
                denom += std::exp(-0.5 * D[i][k] / sigma2[i]);
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            cond[i][j] = j == i ? 0.0 : std::exp(-0.5 * D[i][j] / sigma2[i]) / denom;
        }
    }
    Dense P(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            P[i][j] = i == j ? 0.0 : (cond[i][j] + cond[j][i]) / (2.0 * static_cast<double>(n));
        }
    }
    return P;
}

/// Student-t affinities with global normalization over all ordered pairs.
inline Dense literal_embedding_affinities(const Dense& Y) {
    const std::size_t n = Y.size();
    Dense D = naive_sqdist(Y);
    double Z = 0;
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t k = 0; k < n; ++k) {
            if (l != k) {
                Z += 1.0 / (1.0 + D[l][k]);
            }
        }
    }
    Dense Q(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Q[i][j] = i == j ? 0.0 : (1.0 / (1.0 + D[i][j])) / Z;
        }
    }
    return Q;
}

/// Entropy (nats) of the Gaussian conditional of row i at bandwidth sigma2, literal formula.
inline double conditional_entropy(const Dense& D, std::size_t i, double sigma2) {
    double denom = 0;
    for (std::size_t k = 0; k < D.size(); ++k) {
        if (k != i) {
            denom += std::exp(-0.5 * D[i][k] / sigma2);
        }
    }
    double h = 0;
    for (std::size_t j = 0; j < D.size(); ++j) {
        if (j == i) {
            continue;
        }
        double p = std::exp(-0.5 * D[i][j] / sigma2) / denom;
        if (p > 0) {
            h -= p * std::log(p);
        }
    }
    return h;
}

/// sigma2 solving exp(H) = perplexity by TOMS 748 on log(sigma2) within [lo, hi].
inline double bandwidth_root(const Dense& D, std::size_t i, double perplexity, double lo = -20, double hi = 20) {
    auto f = [&](double s) { return conditional_entropy(D, i, std::exp(s)) - std::log(perplexity); };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 500;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
    return std::exp(0.5 * (r.first + r.second));
}

/// Mean silhouette width from the textbook definition.
inline double silhouette(const Dense& Y, const std::vector<std::size_t>& labels) {
    const std::size_t n = Y.size();
    std::size_t L = 0;
    for (auto l : labels) {
        L = std::max(L, l + 1);
    }
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> sum(L);
        std::vector<double> cnt(L);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            double d = 0;
            for (std::size_t c = 0; c < Y[i].size(); ++c) {
                d += (Y[i][c] - Y[j][c]) * (Y[i][c] - Y[j][c]);
            }
            sum[labels[j]] += std::sqrt(d);
            cnt[labels[j]] += 1;
        }
        if (cnt[labels[i]] == 0) {
            continue;
        }
        double a = sum[labels[i]] / cnt[labels[i]];
        double b = 1e300;
        for (std::size_t l = 0; l < L; ++l) {
            if (l != labels[i] && cnt[l] > 0) {
                b = std::min(b, sum[l] / cnt[l]);
            }
        }
        total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

/// Largest sine of the principal angles between span(A) and span(B), via Gram-Schmidt bases.
inline double subspace_distance(const Dense& A, const Dense& B) {
    auto orthonormal = [](const Dense& M) {
        Dense cols = transpose(M), basis;
        for (auto c : cols) {
            for (int pass = 0; pass < 2; ++pass) {
                for (const auto& q : basis) {
                    double dot = 0;
                    for (std::size_t i = 0; i < c.size(); ++i) {
                        dot += q[i] * c[i];
                    }
                    for (std::size_t i = 0; i < c.size(); ++i) {
                        c[i] -= dot * q[i];
                    }
                }
            }
            double nrm = 0;
            for (double v : c) {
                nrm += v * v;
            }
            nrm = std::sqrt(nrm);
            if (nrm > 1e-10) {
                for (auto& v : c) {
                    v /= nrm;
                }
                basis.push_back(c);
            }
        }
        return basis;
    };
    Dense qa = orthonormal(A), qb = orthonormal(B);
    double worst = 0;
    for (auto a : qa) {
        for (const auto& b : qb) {
            double dot = 0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                dot += a[i] * b[i];
            }
            for (std::size_t i = 0; i < a.size(); ++i) {
                a[i] -= dot * b[i];
            }
        }
        double nrm = 0;
        for (double v : a) {
            nrm += v * v;
        }
        worst = std::max(worst, std::sqrt(nrm));
    }
    return qa.size() == qb.size() ? worst : 1.0;
}

}

#endif
