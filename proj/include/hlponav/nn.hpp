#pragma once
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "rng.hpp"

namespace hlponav {

using ParamVec = std::vector<double>;

namespace nn_detail {

inline void matvec(const double* W, const double* x, double* y, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        double s = 0.0;
        const double* row = W + size_t(i) * cols;
        for (int j = 0; j < cols; ++j) s += row[j] * x[j];
        y[i] += s;
    }
}

// y += W^T d
inline void matvec_t(const double* W, const double* d, double* y, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        const double* row = W + size_t(i) * cols;
        for (int j = 0; j < cols; ++j) y[j] += row[j] * d[i];
    }
}

// G += d x^T
inline void outer_acc(double* G, const double* d, const double* x, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        double di = d[i];
        double* row = G + size_t(i) * cols;
        for (int j = 0; j < cols; ++j) row[j] += di * x[j];
    }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace nn_detail

struct NetConfig {
    int obs_dim = 0;
    int enc_dim = 64;
    int hidden_dim = 128;
    int num_actions = 4;
    bool operator==(const NetConfig&) const = default;
};

// Two-head recurrent actor-critic: two FC encoder layers, one GRU cell, a
// 4-logit actor head and a scalar critic head sharing the trunk. Parameters
// live in one flat vector; gradients use the same layout.
class ActorCritic {
  public:
    explicit ActorCritic(const NetConfig& cfg) : c_(cfg) {
        int in = c_.obs_dim, e = c_.enc_dim, h = c_.hidden_dim, a = c_.num_actions;
        auto alloc = [&](int n) {
            int off = total_;
            total_ += n;
            return off;
        };
        W1 = alloc(e * in), b1 = alloc(e);
        W2 = alloc(e * e), b2 = alloc(e);
        Wz = alloc(h * e), Uz = alloc(h * h), bz = alloc(h);
        Wr = alloc(h * e), Ur = alloc(h * h), br = alloc(h);
        Wn = alloc(h * e), Un = alloc(h * h), bn = alloc(h);
        Wa = alloc(a * h), ba = alloc(a);
        Wc = alloc(h), bc = alloc(1);
    }

    const NetConfig& config() const { return c_; }
    int num_params() const { return total_; }

    ParamVec init_params(uint64_t seed) const {
        ParamVec p(total_, 0.0);
        Rng rng = make_rng(seed, 0x9a7a);
        auto xavier = [&](int off, int rows, int cols) {
            double s = std::sqrt(6.0 / (rows + cols));
            for (int i = 0; i < rows * cols; ++i) p[off + i] = uniform(rng, -s, s);
        };
        int in = c_.obs_dim, e = c_.enc_dim, h = c_.hidden_dim, a = c_.num_actions;
        xavier(W1, e, in);
        xavier(W2, e, e);
        xavier(Wz, h, e), xavier(Uz, h, h);
        xavier(Wr, h, e), xavier(Ur, h, h);
        xavier(Wn, h, e), xavier(Un, h, h);
        xavier(Wa, a, h);
        xavier(Wc, 1, h);
        return p;
    }

    struct Cache {
        std::vector<double> x, e1, e2, z, r, uh, n, h_prev, h_new, logits;
        double value = 0.0;
    };

    struct Output {
        std::vector<double> logits;
        double value = 0.0;
        std::vector<double> hidden;
    };

    std::vector<double> initial_hidden() const { return std::vector<double>(c_.hidden_dim, 0.0); }

    Output forward(const ParamVec& p, const std::vector<double>& obs,
                   const std::vector<double>& hidden, Cache* cache = nullptr) const {
        using namespace nn_detail;
        if (int(obs.size()) != c_.obs_dim) throw std::invalid_argument("forward: obs dim mismatch");
        if (int(hidden.size()) != c_.hidden_dim)
            throw std::invalid_argument("forward: hidden dim mismatch");
        int in = c_.obs_dim, e = c_.enc_dim, h = c_.hidden_dim, a = c_.num_actions;
        const double* P = p.data();

        std::vector<double> e1(e), e2(e), z(h), r(h), uh(h), n(h), hn(h);
        for (int i = 0; i < e; ++i) e1[i] = P[b1 + i];
        matvec(P + W1, obs.data(), e1.data(), e, in);
        for (auto& v : e1) v = std::tanh(v);
        for (int i = 0; i < e; ++i) e2[i] = P[b2 + i];
        matvec(P + W2, e1.data(), e2.data(), e, e);
        for (auto& v : e2) v = std::tanh(v);

        for (int i = 0; i < h; ++i) z[i] = P[bz + i];
        matvec(P + Wz, e2.data(), z.data(), h, e);
        matvec(P + Uz, hidden.data(), z.data(), h, h);
        for (auto& v : z) v = sigmoid(v);

        for (int i = 0; i < h; ++i) r[i] = P[br + i];
        matvec(P + Wr, e2.data(), r.data(), h, e);
        matvec(P + Ur, hidden.data(), r.data(), h, h);
        for (auto& v : r) v = sigmoid(v);

        for (int i = 0; i < h; ++i) uh[i] = P[bn + i];
        matvec(P + Un, hidden.data(), uh.data(), h, h);
        for (int i = 0; i < h; ++i) n[i] = 0.0;
        matvec(P + Wn, e2.data(), n.data(), h, e);
        for (int i = 0; i < h; ++i) n[i] = std::tanh(n[i] + r[i] * uh[i]);

        for (int i = 0; i < h; ++i) hn[i] = (1.0 - z[i]) * n[i] + z[i] * hidden[i];

        Output out;
        out.logits.assign(a, 0.0);
        for (int i = 0; i < a; ++i) out.logits[i] = P[ba + i];
        matvec(P + Wa, hn.data(), out.logits.data(), a, h);
        out.value = P[bc];
        for (int i = 0; i < h; ++i) out.value += P[Wc + i] * hn[i];
        out.hidden = hn;

        for (double v : out.logits)
            if (!std::isfinite(v)) throw std::runtime_error("forward: non-finite activation");
        if (!std::isfinite(out.value)) throw std::runtime_error("forward: non-finite value");

        if (cache) {
            cache->x = obs;
            cache->e1 = std::move(e1);
            cache->e2 = std::move(e2);
            cache->z = std::move(z);
            cache->r = std::move(r);
            cache->uh = std::move(uh);
            cache->n = std::move(n);
            cache->h_prev = hidden;
            cache->h_new = hn;
            cache->logits = out.logits;
            cache->value = out.value;
        }
        return out;
    }

    // Backprop one step. dlogits/dvalue are the loss gradients at the heads,
    // dh_new carries gradient from later timesteps; returns dh_prev and
    // accumulates parameter gradients into grad.
    std::vector<double> backward(const ParamVec& p, const Cache& k,
                                 const std::vector<double>& dlogits, double dvalue,
                                 const std::vector<double>& dh_new, ParamVec& grad) const {
        using namespace nn_detail;
        int in = c_.obs_dim, e = c_.enc_dim, h = c_.hidden_dim, a = c_.num_actions;
        const double* P = p.data();
        double* G = grad.data();

        std::vector<double> dh(h, 0.0);
        for (int i = 0; i < h; ++i) dh[i] = dh_new[i];
        // heads
        outer_acc(G + Wa, dlogits.data(), k.h_new.data(), a, h);
        for (int i = 0; i < a; ++i) G[ba + i] += dlogits[i];
        matvec_t(P + Wa, dlogits.data(), dh.data(), a, h);
        for (int i = 0; i < h; ++i) G[Wc + i] += dvalue * k.h_new[i];
        G[bc] += dvalue;
        for (int i = 0; i < h; ++i) dh[i] += dvalue * P[Wc + i];

        std::vector<double> dn(h), dz(h), dhp(h, 0.0), de2(e, 0.0);
        for (int i = 0; i < h; ++i) {
            dn[i] = dh[i] * (1.0 - k.z[i]);
            dz[i] = dh[i] * (k.h_prev[i] - k.n[i]);
            dhp[i] = dh[i] * k.z[i];
        }
        // n branch
        std::vector<double> dpre_n(h), duh(h), dr(h);
        for (int i = 0; i < h; ++i) dpre_n[i] = dn[i] * (1.0 - k.n[i] * k.n[i]);
        outer_acc(G + Wn, dpre_n.data(), k.e2.data(), h, e);
        matvec_t(P + Wn, dpre_n.data(), de2.data(), h, e);
        for (int i = 0; i < h; ++i) {
            dr[i] = dpre_n[i] * k.uh[i];
            duh[i] = dpre_n[i] * k.r[i];
        }
        outer_acc(G + Un, duh.data(), k.h_prev.data(), h, h);
        for (int i = 0; i < h; ++i) G[bn + i] += duh[i];
        matvec_t(P + Un, duh.data(), dhp.data(), h, h);
        // r branch
        std::vector<double> dpre_r(h);
        for (int i = 0; i < h; ++i) dpre_r[i] = dr[i] * k.r[i] * (1.0 - k.r[i]);
        outer_acc(G + Wr, dpre_r.data(), k.e2.data(), h, e);
        outer_acc(G + Ur, dpre_r.data(), k.h_prev.data(), h, h);
        for (int i = 0; i < h; ++i) G[br + i] += dpre_r[i];
        matvec_t(P + Wr, dpre_r.data(), de2.data(), h, e);
        matvec_t(P + Ur, dpre_r.data(), dhp.data(), h, h);
        // z branch
        std::vector<double> dpre_z(h);
        for (int i = 0; i < h; ++i) dpre_z[i] = dz[i] * k.z[i] * (1.0 - k.z[i]);
        outer_acc(G + Wz, dpre_z.data(), k.e2.data(), h, e);
        outer_acc(G + Uz, dpre_z.data(), k.h_prev.data(), h, h);
        for (int i = 0; i < h; ++i) G[bz + i] += dpre_z[i];
        matvec_t(P + Wz, dpre_z.data(), de2.data(), h, e);
        matvec_t(P + Uz, dpre_z.data(), dhp.data(), h, h);
        // encoder
        std::vector<double> dpre_e2(e), de1(e, 0.0), dpre_e1(e);
        for (int i = 0; i < e; ++i) dpre_e2[i] = de2[i] * (1.0 - k.e2[i] * k.e2[i]);
        outer_acc(G + W2, dpre_e2.data(), k.e1.data(), e, e);
        for (int i = 0; i < e; ++i) G[b2 + i] += dpre_e2[i];
        matvec_t(P + W2, dpre_e2.data(), de1.data(), e, e);
        for (int i = 0; i < e; ++i) dpre_e1[i] = de1[i] * (1.0 - k.e1[i] * k.e1[i]);
        outer_acc(G + W1, dpre_e1.data(), k.x.data(), e, in);
        for (int i = 0; i < e; ++i) G[b1 + i] += dpre_e1[i];
        return dhp;
    }

  private:
    NetConfig c_;
    int total_ = 0;
    int W1 = 0, b1 = 0, W2 = 0, b2 = 0;
    int Wz = 0, Uz = 0, bz = 0, Wr = 0, Ur = 0, br = 0, Wn = 0, Un = 0, bn = 0;
    int Wa = 0, ba = 0, Wc = 0, bc = 0;
};

inline std::vector<double> softmax(const std::vector<double>& logits) {
    double m = logits[0];
    for (double v : logits) m = std::max(m, v);
    std::vector<double> p(logits.size());
    double s = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        s += p[i];
    }
    for (auto& v : p) v /= s;
    return p;
}

inline double log_softmax_at(const std::vector<double>& logits, int idx) {
    double m = logits[0];
    for (double v : logits) m = std::max(m, v);
    double s = 0.0;
    for (double v : logits) s += std::exp(v - m);
    return logits[idx] - m - std::log(s);
}

inline double entropy(const std::vector<double>& logits) {
    auto p = softmax(logits);
    double h = 0.0;
    for (double v : p)
        if (v > 0) h -= v * std::log(v);
    return h;
}

inline int sample_categorical(const std::vector<double>& logits, Rng& rng) {
    auto p = softmax(logits);
    double u = uniform(rng);
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return int(i);
    }
    return int(p.size()) - 1;
}

} // namespace hlponav
