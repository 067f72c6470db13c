// ReLU multilayer perceptron: x_l = ReLU(W_l x_{l-1} + b_l) for hidden layers,
// with an identity or softmax output head. Forward, loss, and exact backprop.
//
// Conventions fixed here and relied on by the rest of the library:
//   - depth L = number of weight layers; dims = [n_0, ..., n_L]
//   - ReLU derivative at exactly 0 is 0 (the "off" branch)
//   - batch reductions run in sample order, so results are bit-reproducible
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "l2inf/errors.hpp"
#include "l2inf/linalg.hpp"
#include "l2inf/rng.hpp"

namespace l2inf {

enum class Head { identity, softmax };
enum class LossKind { square, crossentropy };

struct LabeledSample {
    Vector x;
    std::size_t label = 0;
};

struct MlpModel {
    std::vector<std::size_t> dims; // n_0 .. n_L
    std::vector<Matrix> weights;   // weights[l]: dims[l+1] x dims[l]
    std::vector<Vector> biases;    // biases[l]: dims[l+1]
    Head head = Head::identity;
    LossKind loss = LossKind::square;

    std::size_t depth() const { return weights.size(); }
    std::size_t input_dim() const { return dims.front(); }
    std::size_t output_dim() const { return dims.back(); }
    std::size_t hidden_units() const {
        std::size_t n = 0;
        for (std::size_t l = 1; l + 1 < dims.size(); ++l) n += dims[l];
        return n;
    }

    void validate() const {
        if (dims.size() < 2) throw ConfigError("model needs at least one weight layer");
        if (weights.size() != dims.size() - 1 || biases.size() != dims.size() - 1)
            throw DimensionError("model: layer count mismatch");
        for (std::size_t l = 0; l < weights.size(); ++l) {
            if (weights[l].rows != dims[l + 1] || weights[l].cols != dims[l])
                throw DimensionError("model: weight shape mismatch at layer " + std::to_string(l));
            if (biases[l].size() != dims[l + 1])
                throw DimensionError("model: bias length mismatch at layer " + std::to_string(l));
        }
        if (loss == LossKind::crossentropy && head != Head::softmax)
            throw ConfigError("crossentropy loss requires the softmax head");
    }
};

inline MlpModel make_mlp(std::vector<std::size_t> dims, Head head, LossKind loss) {
    MlpModel m;
    m.dims = std::move(dims);
    m.head = head;
    m.loss = loss;
    for (std::size_t l = 0; l + 1 < m.dims.size(); ++l) {
        m.weights.emplace_back(m.dims[l + 1], m.dims[l]);
        m.biases.emplace_back(m.dims[l + 1], 0.0);
    }
    m.validate();
    return m;
}

// Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
// Draw order is layer-major then row-major, so a seed pins the exact model.
inline void init_weights(MlpModel& m, Rng& rng) {
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(m.dims[l]));
        for (double& w : m.weights[l].data) w = rng.uniform(-bound, bound);
        std::fill(m.biases[l].begin(), m.biases[l].end(), 0.0);
    }
}

inline Vector softmax(const Vector& z) {
    double zmax = z[0];
    for (double v : z) zmax = std::max(zmax, v);
    Vector p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - zmax);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

struct ForwardTrace {
    std::vector<Vector> preacts; // preacts[l] = W_{l+1} x_l + b_{l+1}
    std::vector<Vector> acts;    // acts[0] = x, acts[l] = layer l output
    Vector logits;               // final-layer pre-head output
    Vector head_out;             // logits or softmax(logits)
};

inline ForwardTrace forward(const MlpModel& m, const Vector& x) {
    if (x.size() != m.input_dim()) throw DimensionError("forward: input length mismatch");
    ForwardTrace t;
    t.acts.push_back(x);
    for (std::size_t l = 0; l < m.depth(); ++l) {
        Vector z = matvec(m.weights[l], t.acts.back());
        axpy(1.0, m.biases[l], z);
        t.preacts.push_back(z);
        if (l + 1 < m.depth()) {
            for (double& v : z) v = v > 0.0 ? v : 0.0;
            t.acts.push_back(std::move(z));
        } else {
            t.logits = std::move(z);
            t.acts.push_back(t.logits);
        }
    }
    t.head_out = (m.head == Head::softmax) ? softmax(t.logits) : t.logits;
    return t;
}

// Argmax of the logits; ties break toward the lowest index.
inline std::size_t predict(const MlpModel& m, const Vector& x) {
    const Vector logits = forward(m, x).logits;
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k)
        if (logits[k] > logits[best]) best = k;
    return best;
}

namespace detail {

// Batched forward pass over column-stacked samples; the workhorse behind
// loss/gradients/accuracy. acts[0] is the n0 x B input block.
struct BatchTrace {
    std::vector<Matrix> preacts;
    std::vector<Matrix> acts;
};

inline Matrix stack_columns(const MlpModel& m, std::span<const LabeledSample> batch) {
    Matrix x(m.input_dim(), batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        if (batch[b].x.size() != m.input_dim())
            throw DimensionError("batch sample dimension mismatch");
        for (std::size_t i = 0; i < m.input_dim(); ++i) x(i, b) = batch[b].x[i];
    }
    return x;
}

inline BatchTrace forward_batch(const MlpModel& m, Matrix x) {
    BatchTrace t;
    t.acts.push_back(std::move(x));
    for (std::size_t l = 0; l < m.depth(); ++l) {
        Matrix z = matmul(m.weights[l], t.acts.back());
        for (std::size_t i = 0; i < z.rows; ++i) {
            double* row = z.row(i);
            const double bi = m.biases[l][i];
            for (std::size_t j = 0; j < z.cols; ++j) row[j] += bi;
        }
        t.preacts.push_back(z);
        if (l + 1 < m.depth())
            for (double& v : z.data) v = v > 0.0 ? v : 0.0;
        t.acts.push_back(std::move(z));
    }
    return t;
}

// Per-sample loss and d(loss)/d(logit) column for one logits column.
inline double sample_loss_and_grad(const MlpModel& m, const double* logits, std::size_t nl,
                                   std::size_t label, double* dlogits) {
    if (m.loss == LossKind::crossentropy) {
        double zmax = logits[0];
        for (std::size_t k = 1; k < nl; ++k) zmax = std::max(zmax, logits[k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < nl; ++k) sum += std::exp(logits[k] - zmax);
        const double logz = zmax + std::log(sum);
        if (dlogits) {
            for (std::size_t k = 0; k < nl; ++k)
                dlogits[k] = std::exp(logits[k] - logz) - (k == label ? 1.0 : 0.0);
        }
        return logz - logits[label];
    }
    // Square loss against the one-hot target, summed over output coordinates.
    if (m.head == Head::softmax) {
        Vector z(logits, logits + nl);
        const Vector p = softmax(z);
        double lo = 0.0;
        Vector g(nl);
        for (std::size_t k = 0; k < nl; ++k) {
            const double r = p[k] - (k == label ? 1.0 : 0.0);
            lo += r * r;
            g[k] = 2.0 * r;
        }
        if (dlogits) {
            double gp = 0.0;
            for (std::size_t k = 0; k < nl; ++k) gp += g[k] * p[k];
            for (std::size_t k = 0; k < nl; ++k) dlogits[k] = p[k] * (g[k] - gp);
        }
        return lo;
    }
    double lo = 0.0;
    for (std::size_t k = 0; k < nl; ++k) {
        const double r = logits[k] - (k == label ? 1.0 : 0.0);
        lo += r * r;
        if (dlogits) dlogits[k] = 2.0 * r;
    }
    return lo;
}

} // namespace detail

inline double loss(const MlpModel& m, std::span<const LabeledSample> batch) {
    if (batch.empty()) throw ConfigError("loss: empty batch");
    const std::size_t nl = m.output_dim();
    Vector col(nl);
    double total = 0.0;
    constexpr std::size_t chunk = 512;
    for (std::size_t off = 0; off < batch.size(); off += chunk) {
        const auto part = batch.subspan(off, std::min(chunk, batch.size() - off));
        const detail::BatchTrace t = detail::forward_batch(m, detail::stack_columns(m, part));
        const Matrix& logits = t.acts.back();
        for (std::size_t b = 0; b < part.size(); ++b) {
            for (std::size_t k = 0; k < nl; ++k) col[k] = logits(k, b);
            total += detail::sample_loss_and_grad(m, col.data(), nl, part[b].label, nullptr);
        }
    }
    return total / static_cast<double>(batch.size());
}

inline double accuracy(const MlpModel& m, std::span<const LabeledSample> batch) {
    if (batch.empty()) throw ConfigError("accuracy: empty batch");
    std::size_t hits = 0;
    constexpr std::size_t chunk = 512;
    for (std::size_t off = 0; off < batch.size(); off += chunk) {
        const auto part = batch.subspan(off, std::min(chunk, batch.size() - off));
        const detail::BatchTrace t = detail::forward_batch(m, detail::stack_columns(m, part));
        const Matrix& logits = t.acts.back();
        for (std::size_t b = 0; b < part.size(); ++b) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < logits.rows; ++k)
                if (logits(k, b) > logits(best, b)) best = k;
            if (best == part[b].label) ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(batch.size());
}

struct Grads {
    std::vector<Matrix> dW;
    std::vector<Vector> db;
};

// Exact gradient of the batch-mean loss. delta matrices are propagated in
// block form; every accumulation runs over samples in order.
inline Grads gradients(const MlpModel& m, std::span<const LabeledSample> batch) {
    if (batch.empty()) throw ConfigError("gradients: empty batch");
    const std::size_t B = batch.size();
    detail::BatchTrace t = detail::forward_batch(m, detail::stack_columns(m, batch));

    const std::size_t L = m.depth();
    const std::size_t nl = m.output_dim();
    Matrix delta(nl, B);
    {
        const Matrix& logits = t.acts.back();
        Vector col(nl), g(nl);
        const double inv = 1.0 / static_cast<double>(B);
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t k = 0; k < nl; ++k) col[k] = logits(k, b);
            detail::sample_loss_and_grad(m, col.data(), nl, batch[b].label, g.data());
            for (std::size_t k = 0; k < nl; ++k) delta(k, b) = g[k] * inv;
        }
    }

    Grads out;
    out.dW.resize(L);
    out.db.resize(L);
    for (std::size_t l = L; l-- > 0;) {
        out.dW[l] = matmul(delta, transpose(t.acts[l]));
        Vector db(m.dims[l + 1], 0.0);
        for (std::size_t i = 0; i < delta.rows; ++i) {
            const double* row = delta.row(i);
            double s = 0.0;
            for (std::size_t b = 0; b < B; ++b) s += row[b];
            db[i] = s;
        }
        out.db[l] = std::move(db);
        if (l > 0) {
            Matrix prev = matmul(transpose(m.weights[l]), delta);
            const Matrix& pre = t.preacts[l - 1];
            for (std::size_t i = 0; i < prev.data.size(); ++i)
                if (!(pre.data[i] > 0.0)) prev.data[i] = 0.0;
            delta = std::move(prev);
        }
    }
    return out;
}

// Gradient with respect to the input of the scalar w . logits(x).
inline Vector input_gradient(const MlpModel& m, const Vector& x, const Vector& out_weights) {
    if (out_weights.size() != m.output_dim())
        throw DimensionError("input_gradient: output weight length mismatch");
    const ForwardTrace t = forward(m, x);
    Vector delta = out_weights;
    for (std::size_t l = m.depth(); l-- > 0;) {
        Vector prev = matvec(transpose(m.weights[l]), delta);
        if (l > 0) {
            const Vector& pre = t.preacts[l - 1];
            for (std::size_t i = 0; i < prev.size(); ++i)
                if (!(pre[i] > 0.0)) prev[i] = 0.0;
        }
        delta = std::move(prev);
    }
    return delta;
}

// ---------------------------------------------------------------------------
// Checkpoint container: versioned plain text, 17 significant digits, so a
// save/load round trip reproduces the model bit for bit.

namespace detail {

inline void write_f17(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

} // namespace detail

inline std::string head_name(Head h) { return h == Head::softmax ? "softmax" : "identity"; }
inline std::string loss_name(LossKind k) { return k == LossKind::crossentropy ? "crossentropy" : "square"; }

inline Head parse_head(const std::string& s) {
    if (s == "softmax") return Head::softmax;
    if (s == "identity") return Head::identity;
    throw FormatError("unknown head kind '" + s + "'");
}

inline LossKind parse_loss(const std::string& s) {
    if (s == "crossentropy") return LossKind::crossentropy;
    if (s == "square") return LossKind::square;
    throw FormatError("unknown loss kind '" + s + "'");
}

inline void save_checkpoint(const MlpModel& m, const std::string& path) {
    m.validate();
    std::string out;
    out += "l2inf-model 1\n";
    out += "dims " + std::to_string(m.dims.size());
    for (std::size_t d : m.dims) out += " " + std::to_string(d);
    out += "\nhead " + head_name(m.head) + "\nloss " + loss_name(m.loss) + "\n";
    for (std::size_t l = 0; l < m.depth(); ++l) {
        out += "W " + std::to_string(m.weights[l].rows) + " " + std::to_string(m.weights[l].cols) + "\n";
        for (std::size_t i = 0; i < m.weights[l].rows; ++i) {
            for (std::size_t j = 0; j < m.weights[l].cols; ++j) {
                if (j) out += ' ';
                detail::write_f17(out, m.weights[l](i, j));
            }
            out += '\n';
        }
        out += "b " + std::to_string(m.biases[l].size()) + "\n";
        for (std::size_t i = 0; i < m.biases[l].size(); ++i) {
            if (i) out += ' ';
            detail::write_f17(out, m.biases[l][i]);
        }
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write checkpoint: " + path);
    f << out;
    if (!f) throw IoError("short write on checkpoint: " + path);
}

inline MlpModel load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint: " + path);
    std::string magic;
    int version = 0;
    if (!(f >> magic >> version) || magic != "l2inf-model")
        throw FormatError("not a model checkpoint: " + path);
    if (version != 1) throw FormatError("unsupported checkpoint version " + std::to_string(version));

    std::string key;
    std::size_t ndims = 0;
    if (!(f >> key >> ndims) || key != "dims") throw FormatError("checkpoint: expected dims header");
    std::vector<std::size_t> dims(ndims);
    for (auto& d : dims)
        if (!(f >> d)) throw FormatError("checkpoint: truncated dims");

    std::string head_s, loss_s;
    if (!(f >> key >> head_s) || key != "head") throw FormatError("checkpoint: expected head");
    if (!(f >> key >> loss_s) || key != "loss") throw FormatError("checkpoint: expected loss");

    MlpModel m = make_mlp(dims, parse_head(head_s), parse_loss(loss_s));
    for (std::size_t l = 0; l < m.depth(); ++l) {
        std::size_t r = 0, c = 0, n = 0;
        if (!(f >> key >> r >> c) || key != "W" || r != m.weights[l].rows || c != m.weights[l].cols)
            throw FormatError("checkpoint: bad weight header at layer " + std::to_string(l));
        for (double& v : m.weights[l].data)
            if (!(f >> v)) throw FormatError("checkpoint: truncated weights at layer " + std::to_string(l));
        if (!(f >> key >> n) || key != "b" || n != m.biases[l].size())
            throw FormatError("checkpoint: bad bias header at layer " + std::to_string(l));
        for (double& v : m.biases[l])
            if (!(f >> v)) throw FormatError("checkpoint: truncated biases at layer " + std::to_string(l));
    }
    m.validate();
    return m;
}

} // namespace l2inf
