#pragma once
// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// A tiny corpus for exhaustive LDA posteriors: docs[d] = term indices of its tokens.
struct TinyCorpus {
    std::vector<std::vector<int>> docs;
    int n_terms = 0;

    int n_tokens() const {
        int n = 0;
        for (const auto& d : docs) n += static_cast<int>(d.size());
        return n;
    }
};

// Exact collapsed posterior p(z | w) over all k^N joint assignments. Tokens are
// numbered doc by doc in the order given. Index of an assignment: sum z_i k^i.
inline std::vector<double> lda_posterior(const TinyCorpus& c, int k, double alpha, double beta) {
    const int n = c.n_tokens();
    std::size_t states = 1;
    for (int i = 0; i < n; ++i) states *= static_cast<std::size_t>(k);
    std::vector<double> logp(states);
    std::vector<int> z(n);
    for (std::size_t s = 0; s < states; ++s) {
        std::size_t rest = s;
        for (int i = 0; i < n; ++i) {
            z[i] = static_cast<int>(rest % k);
            rest /= k;
        }
        double lp = 0.0;
        std::vector<int> ntw(k * c.n_terms, 0);
        std::vector<int> nt(k, 0);
        int pos = 0;
        for (const auto& doc : c.docs) {
            std::vector<int> ndt(k, 0);
            for (int w : doc) {
                ++ndt[z[pos]];
                ++ntw[z[pos] * c.n_terms + w];
                ++nt[z[pos]];
                ++pos;
            }
            for (int t = 0; t < k; ++t) lp += std::lgamma(ndt[t] + alpha) - std::lgamma(alpha);
            lp -= std::lgamma(static_cast<double>(doc.size()) + k * alpha) - std::lgamma(k * alpha);
        }
        for (int t = 0; t < k; ++t) {
            for (int w = 0; w < c.n_terms; ++w) lp += std::lgamma(ntw[t * c.n_terms + w] + beta) - std::lgamma(beta);
            lp -= std::lgamma(nt[t] + c.n_terms * beta) - std::lgamma(c.n_terms * beta);
        }
        logp[s] = lp;
    }
    const double mx = *std::max_element(logp.begin(), logp.end());
    double total = 0.0;
    for (auto& v : logp) total += (v = std::exp(v - mx));
    for (auto& v : logp) v /= total;
    return logp;
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

// Coherence by direct counting over a document x term occurrence table.
inline double coherence(const std::vector<std::set<std::string>>& docs, const std::vector<std::string>& terms) {
    const double n = static_cast<double>(docs.size());
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            ++pairs;
            int di = 0, dj = 0, dij = 0;
            for (const auto& d : docs) {
                const bool hi = d.count(terms[i]) > 0;
                const bool hj = d.count(terms[j]) > 0;
                di += hi;
                dj += hj;
                dij += hi && hj;
            }
            if (di == 0) continue;
            sum += static_cast<double>(dij) / di - dj / n;
        }
    }
    return pairs ? sum / pairs : 0.0;
}

// Minimum WSS over every labelling of n points into at most k non-empty groups.
inline double best_partition_wss(const std::vector<std::vector<double>>& pts, int k) {
    const int n = static_cast<int>(pts.size());
    const int d = static_cast<int>(pts.front().size());
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> lab(n, 0);
    // Restricted growth strings enumerate each set partition once.
    std::function<void(int, int)> rec = [&](int i, int used) {
        if (i == n) {
            if (used != std::min(k, n)) return;
            double wss = 0.0;
            for (int c = 0; c < used; ++c) {
                std::vector<double> mean(d, 0.0);
                int m = 0;
                for (int p = 0; p < n; ++p) {
                    if (lab[p] != c) continue;
                    ++m;
                    for (int j = 0; j < d; ++j) mean[j] += pts[p][j];
                }
                for (auto& v : mean) v /= m;
                for (int p = 0; p < n; ++p) {
                    if (lab[p] != c) continue;
                    for (int j = 0; j < d; ++j) wss += (pts[p][j] - mean[j]) * (pts[p][j] - mean[j]);
                }
            }
            best = std::min(best, wss);
            return;
        }
        for (int c = 0; c < std::min(used + 1, k); ++c) {
            lab[i] = c;
            rec(i + 1, std::max(used, c + 1));
        }
    };
    rec(0, 0);
    return best;
}

// Solves the normal equations X'X b = X'y by Gauss-Jordan elimination in long double.
inline std::vector<double> normal_equations(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
    const std::size_t p = x.front().size();
    std::vector<std::vector<long double>> a(p, std::vector<long double>(p + 1, 0.0L));
    for (std::size_t r = 0; r < x.size(); ++r) {
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) a[i][j] += static_cast<long double>(x[r][i]) * x[r][j];
            a[i][p] += static_cast<long double>(x[r][i]) * y[r];
        }
    }
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < p; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        }
        std::swap(a[c], a[piv]);
        for (std::size_t r = 0; r < p; ++r) {
            if (r == c) continue;
            const long double f = a[r][c] / a[c][c];
            for (std::size_t j = c; j <= p; ++j) a[r][j] -= f * a[c][j];
        }
    }
    std::vector<double> b(p);
    for (std::size_t i = 0; i < p; ++i) b[i] = static_cast<double>(a[i][p] / a[i][i]);
    return b;
}

}  // namespace oracle
