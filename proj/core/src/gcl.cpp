#include "specaug/gcl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace specaug {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
    return splitmix64(base ^ splitmix64(a ^ splitmix64(b ^ splitmix64(c))));
}

struct ForwardCache {
    Matrix prop;
    std::vector<Matrix> inputs;  // layer inputs, inputs[0] = X
    std::vector<Matrix> pre;     // pre-activation per layer
    Matrix reps;                 // node representations
    Vector pooled;
    Vector z;
};

ForwardCache forward_cached(const Graph& g, const Matrix& x,
                            const EncoderState& enc, const ReadoutState& r) {
    ForwardCache cache;
    cache.prop = propagation_matrix(g, enc.conv_kind, enc.gin_epsilon);
    Matrix h = x;
    const int layers = static_cast<int>(enc.layer_weights.size());
    for (int l = 0; l < layers; ++l) {
        if (h.cols() != enc.layer_weights[l].rows())
            throw std::invalid_argument("encoder layer dimension mismatch");
        cache.inputs.push_back(h);
        Matrix z = cache.prop * h * enc.layer_weights[l];
        cache.pre.push_back(z);
        h = (l + 1 < layers) ? z.cwiseMax(0.0).eval() : z;
    }
    cache.reps = h;
    if (g.n == 0) throw std::invalid_argument("empty graph in readout");
    Vector pooled = cache.reps.colwise().sum();
    if (r.pool == PoolKind::kMean) pooled /= double(g.n);
    cache.pooled = pooled;
    cache.z = r.proj * pooled;
    return cache;
}

struct BackwardAccum {
    std::vector<Matrix> layer_grads;
    Matrix proj_grad;
};

// propagate d(loss)/d(reps) and d(loss)/dz of one view through the encoder
void backward_view(const ForwardCache& cache, const EncoderState& enc,
                   const ReadoutState& r, const Matrix& d_reps_in,
                   const Vector& dz, BackwardAccum* acc) {
    Matrix d_reps = d_reps_in;
    // readout
    acc->proj_grad += dz * cache.pooled.transpose();
    Vector d_pooled = r.proj.transpose() * dz;
    const double coef =
        (r.pool == PoolKind::kMean) ? 1.0 / double(cache.reps.rows()) : 1.0;
    d_reps += coef * Vector::Ones(cache.reps.rows()) * d_pooled.transpose();

    const int layers = static_cast<int>(enc.layer_weights.size());
    Matrix dh = d_reps;
    for (int l = layers - 1; l >= 0; --l) {
        Matrix dz_l = dh;
        if (l + 1 < layers)  // ReLU between layers, last layer linear
            dz_l = dh.cwiseProduct(
                (cache.pre[l].array() > 0.0).cast<double>().matrix());
        Matrix ph = cache.prop * cache.inputs[l];
        acc->layer_grads[l] += ph.transpose() * dz_l;
        if (l > 0)
            dh = cache.prop.transpose() * dz_l *
                 enc.layer_weights[l].transpose();
    }
}

constexpr double kNormEps = 1e-12;

double cosine(const Vector& h, const Vector& z) {
    double nh = h.norm(), nz = z.norm();
    if (nh < kNormEps || nz < kNormEps) return 0.0;  // zero-norm convention
    return h.dot(z) / (nh * nz);
}

// d cos(h,z) / dh and / dz
void cosine_grads(const Vector& h, const Vector& z, Vector* dh, Vector* dz) {
    double nh = h.norm(), nz = z.norm();
    if (nh < kNormEps || nz < kNormEps) {
        dh->setZero(h.size());
        dz->setZero(z.size());
        return;
    }
    double c = h.dot(z) / (nh * nz);
    *dh = z / (nh * nz) - c * h / (nh * nh);
    *dz = h / (nh * nz) - c * z / (nz * nz);
}

double logsumexp(const Vector& v) {
    double mx = v.maxCoeff();
    return mx + std::log((v.array() - mx).exp().sum());
}

}  // namespace

EncoderState init_encoder(int d_in, int hidden_dim, int layers, ConvKind kind,
                          std::uint64_t seed) {
    if (layers < 1) throw std::invalid_argument("need at least one layer");
    EncoderState enc;
    enc.conv_kind = kind;
    std::mt19937_64 rng(seed);
    int in = d_in;
    for (int l = 0; l < layers; ++l) {
        double bound = 1.0 / std::sqrt(double(in));
        std::uniform_real_distribution<double> unif(-bound, bound);
        Matrix w(in, hidden_dim);
        for (int i = 0; i < w.rows(); ++i)
            for (int j = 0; j < w.cols(); ++j) w(i, j) = unif(rng);
        enc.layer_weights.push_back(w);
        in = hidden_dim;
    }
    return enc;
}

ReadoutState init_readout(int dim, PoolKind pool, std::uint64_t seed) {
    ReadoutState r;
    r.pool = pool;
    std::mt19937_64 rng(seed);
    double bound = 1.0 / std::sqrt(double(dim));
    std::uniform_real_distribution<double> unif(-bound, bound);
    r.proj.resize(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) r.proj(i, j) = unif(rng);
    return r;
}

Matrix propagation_matrix(const Graph& g, ConvKind kind, double gin_epsilon) {
    const double floor = 1e-8;
    if (kind == ConvKind::kGcn) {
        Matrix a_tilde = g.adjacency + Matrix::Identity(g.n, g.n);
        Vector d = a_tilde.rowwise().sum();
        Vector s(g.n);
        for (int i = 0; i < g.n; ++i) s(i) = 1.0 / std::sqrt(d(i));
        return s.asDiagonal() * a_tilde * s.asDiagonal();
    }
    Vector d = g.adjacency.rowwise().sum();
    Vector s(g.n);
    for (int i = 0; i < g.n; ++i)
        s(i) = 1.0 / std::sqrt(std::max(d(i), floor));
    return (1.0 + gin_epsilon) * Matrix::Identity(g.n, g.n) +
           s.asDiagonal() * g.adjacency * s.asDiagonal();
}

Matrix gcn_forward(const Graph& g, const Matrix& x, const EncoderState& enc) {
    if (enc.conv_kind != ConvKind::kGcn)
        throw std::invalid_argument("encoder is not a GCN");
    const int out = static_cast<int>(enc.layer_weights.back().cols());
    ReadoutState dummy{PoolKind::kMean, Matrix::Identity(out, out)};
    return forward_cached(g, x, enc, dummy).reps;
}

Matrix gin_forward(const Graph& g, const Matrix& x, const EncoderState& enc) {
    if (enc.conv_kind != ConvKind::kGin)
        throw std::invalid_argument("encoder is not a GIN");
    ReadoutState dummy{PoolKind::kSum,
                       Matrix::Identity(
                           static_cast<int>(enc.layer_weights.back().cols()),
                           static_cast<int>(enc.layer_weights.back().cols()))};
    return forward_cached(g, x, enc, dummy).reps;
}

Matrix encoder_forward(const Graph& g, const Matrix& x,
                       const EncoderState& enc) {
    return enc.conv_kind == ConvKind::kGcn ? gcn_forward(g, x, enc)
                                           : gin_forward(g, x, enc);
}

Vector readout(const Matrix& node_reps, const ReadoutState& r) {
    if (node_reps.rows() == 0)
        throw std::invalid_argument("readout of an empty graph");
    Vector pooled = node_reps.colwise().sum();
    if (r.pool == PoolKind::kMean) pooled /= double(node_reps.rows());
    return r.proj * pooled;
}

Matrix feature_mask(const Matrix& x, double sigma_f, std::uint64_t seed) {
    if (sigma_f < 0.0 || sigma_f >= 1.0)
        throw std::invalid_argument("sigma_f must be in [0,1)");
    const int d = static_cast<int>(x.cols());
    const int masked = static_cast<int>(std::lround(sigma_f * d));
    if (masked == 0) return x;
    std::vector<int> cols(d);
    for (int i = 0; i < d; ++i) cols[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(cols.begin(), cols.end(), rng);
    Matrix out = x;
    for (int i = 0; i < masked; ++i) out.col(cols[i]).setZero();
    return out;
}

double infonce_mi(const Vector& h_i, const Vector& z,
                  const Matrix& negatives) {
    Vector cosines(negatives.rows());
    for (int j = 0; j < negatives.rows(); ++j)
        cosines(j) = cosine(negatives.row(j).transpose(), z);
    return cosine(h_i, z) - logsumexp(cosines);
}

double gcl_loss(const Graph& view1, const Graph& view2, const Matrix& x1,
                const Matrix& x2, const EncoderState& enc,
                const ReadoutState& r, NegativeMode mode,
                const Matrix* x1_corrupt, const Matrix* x2_corrupt) {
    std::vector<Matrix> x1c, x2c;
    if (mode == NegativeMode::kCorrupted) {
        if (!x1_corrupt || !x2_corrupt)
            throw std::invalid_argument(
                "corrupted negatives need corrupted features");
        x1c.push_back(*x1_corrupt);
        x2c.push_back(*x2_corrupt);
    }
    return gcl_loss_and_grad({view1}, {view2}, {x1}, {x2}, enc, r, nullptr,
                             mode, x1c.empty() ? nullptr : &x1c,
                             x2c.empty() ? nullptr : &x2c);
}

double gcl_loss_and_grad(const std::vector<Graph>& view1s,
                         const std::vector<Graph>& view2s,
                         const std::vector<Matrix>& x1s,
                         const std::vector<Matrix>& x2s,
                         const EncoderState& enc, const ReadoutState& r,
                         GclGradients* grads, NegativeMode mode,
                         const std::vector<Matrix>* x1_corrupts,
                         const std::vector<Matrix>* x2_corrupts) {
    const int q = static_cast<int>(view1s.size());
    if (q == 0 || static_cast<int>(view2s.size()) != q)
        throw std::invalid_argument("view lists must be equal and non-empty");
    const bool corrupted = mode == NegativeMode::kCorrupted;
    if (corrupted &&
        (!x1_corrupts || !x2_corrupts ||
         static_cast<int>(x1_corrupts->size()) != q ||
         static_cast<int>(x2_corrupts->size()) != q))
        throw std::invalid_argument(
            "corrupted negatives need one corrupted feature matrix per view");

    std::vector<ForwardCache> c1(q), c2(q), c1c, c2c;
    if (corrupted) {
        c1c.resize(q);
        c2c.resize(q);
    }
    std::vector<int> offset(q + 1, 0);
    for (int l = 0; l < q; ++l) {
        if (view1s[l].n != view2s[l].n)
            throw std::invalid_argument("views of one graph differ in size");
        c1[l] = forward_cached(view1s[l], x1s[l], enc, r);
        c2[l] = forward_cached(view2s[l], x2s[l], enc, r);
        if (corrupted) {
            c1c[l] = forward_cached(view1s[l], (*x1_corrupts)[l], enc, r);
            c2c[l] = forward_cached(view2s[l], (*x2_corrupts)[l], enc, r);
        }
        offset[l + 1] = offset[l] + view1s[l].n;
    }
    const int total = offset[q];
    const int dim = static_cast<int>(c1[0].reps.cols());

    std::vector<Matrix> d_reps1(q), d_reps2(q), d_reps1c(q), d_reps2c(q);
    std::vector<Vector> dz1(q), dz2(q);
    for (int l = 0; l < q; ++l) {
        d_reps1[l] = Matrix::Zero(view1s[l].n, dim);
        d_reps2[l] = Matrix::Zero(view2s[l].n, dim);
        if (corrupted) {
            d_reps1c[l] = Matrix::Zero(view1s[l].n, dim);
            d_reps2c[l] = Matrix::Zero(view2s[l].n, dim);
        }
        dz1[l] = Vector::Zero(dim);
        dz2[l] = Vector::Zero(dim);
    }

    double loss = 0.0;

    // direction (a, b): positives are nodes of view a against the summary z
    // of view b; negatives cneg are the denominator reps for this direction
    // (opposite view, same view, or the corrupted copy of view a).
    auto direction = [&](const std::vector<ForwardCache>& ca,
                         const std::vector<ForwardCache>& cb,
                         const std::vector<ForwardCache>& cneg,
                         std::vector<Matrix>& d_reps_a,
                         std::vector<Matrix>& d_reps_neg,
                         std::vector<Vector>& dz_b) {
        for (int l = 0; l < q; ++l) {
            const Vector& z = cb[l].z;
            const int nl = static_cast<int>(ca[l].reps.rows());
            const double w = 1.0 / (double(q) * nl);
            Vector c(total);
            for (int g = 0; g < q; ++g)
                for (int i = 0; i < cneg[g].reps.rows(); ++i)
                    c(offset[g] + i) =
                        cosine(cneg[g].reps.row(i).transpose(), z);
            const double lse = logsumexp(c);
            double pos_sum = 0.0;
            for (int i = 0; i < nl; ++i)
                pos_sum += cosine(ca[l].reps.row(i).transpose(), z);
            loss += -(pos_sum - nl * lse) * w;

            if (!grads) continue;
            Vector dh(dim), dzv(dim);
            for (int i = 0; i < nl; ++i) {
                cosine_grads(ca[l].reps.row(i).transpose(), z, &dh, &dzv);
                d_reps_a[l].row(i) -= w * dh.transpose();
                dz_b[l] -= w * dzv;
            }
            Vector p = (c.array() - lse).exp();
            for (int g = 0; g < q; ++g)
                for (int i = 0; i < cneg[g].reps.rows(); ++i) {
                    double qj = p(offset[g] + i) / double(q);
                    cosine_grads(cneg[g].reps.row(i).transpose(), z, &dh,
                                 &dzv);
                    d_reps_neg[g].row(i) += qj * dh.transpose();
                    dz_b[l] += qj * dzv;
                }
        }
    };
    switch (mode) {
        case NegativeMode::kCorrupted:
            direction(c1, c2, c1c, d_reps1, d_reps1c, dz2);
            direction(c2, c1, c2c, d_reps2, d_reps2c, dz1);
            break;
        case NegativeMode::kOppositeView:
            direction(c1, c2, c2, d_reps1, d_reps2, dz2);
            direction(c2, c1, c1, d_reps2, d_reps1, dz1);
            break;
        case NegativeMode::kSameView:
            direction(c1, c2, c1, d_reps1, d_reps1, dz2);
            direction(c2, c1, c2, d_reps2, d_reps2, dz1);
            break;
    }

    if (grads) {
        BackwardAccum acc;
        acc.proj_grad = Matrix::Zero(r.proj.rows(), r.proj.cols());
        for (const auto& w : enc.layer_weights)
            acc.layer_grads.push_back(Matrix::Zero(w.rows(), w.cols()));
        const Vector dz0 = Vector::Zero(dim);
        for (int l = 0; l < q; ++l) {
            backward_view(c1[l], enc, r, d_reps1[l], dz1[l], &acc);
            backward_view(c2[l], enc, r, d_reps2[l], dz2[l], &acc);
            if (corrupted) {
                backward_view(c1c[l], enc, r, d_reps1c[l], dz0, &acc);
                backward_view(c2c[l], enc, r, d_reps2c[l], dz0, &acc);
            }
        }
        grads->layer_grads = std::move(acc.layer_grads);
        grads->proj_grad = std::move(acc.proj_grad);
    }
    return loss;
}

TrainResult train(const std::vector<Graph>& graphs,
                  const std::vector<AugmentationScheme>& schemes,
                  const TrainConfig& cfg, const EncoderState* resume_encoder,
                  const ReadoutState* resume_readout) {
    if (graphs.empty() || graphs.size() != schemes.size())
        throw std::invalid_argument("graphs/schemes size mismatch");
    if (cfg.epochs < 1 || cfg.lr < 0.0 || cfg.start_epoch < 0 ||
        cfg.start_epoch >= cfg.epochs)
        throw std::invalid_argument("invalid train config");

    std::vector<Matrix> features;
    for (const auto& g : graphs)
        features.push_back(g.features ? *g.features
                                      : one_hot_degree_features(g));
    const int d_in = static_cast<int>(features[0].cols());

    EncoderState enc =
        resume_encoder ? *resume_encoder
                       : init_encoder(d_in, cfg.hidden_dim, cfg.layers,
                                      cfg.conv_kind,
                                      derive_seed(cfg.seed, 0, 0, 1));
    ReadoutState rd = resume_readout
                          ? *resume_readout
                          : init_readout(cfg.hidden_dim, cfg.pool,
                                         derive_seed(cfg.seed, 0, 0, 2));

    std::vector<ComplementDirection> dirs;
    for (const auto& g : graphs) dirs.push_back(complement_direction(g));

    // Adam state (only touched when use_adam)
    std::vector<Matrix> m_w, v_w;
    Matrix m_p, v_p;
    if (cfg.use_adam) {
        for (const auto& w : enc.layer_weights) {
            m_w.push_back(Matrix::Zero(w.rows(), w.cols()));
            v_w.push_back(Matrix::Zero(w.rows(), w.cols()));
        }
        m_p = Matrix::Zero(rd.proj.rows(), rd.proj.cols());
        v_p = Matrix::Zero(rd.proj.rows(), rd.proj.cols());
    }
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    long adam_t = 0;

    TrainResult result;
    const int total_graphs = static_cast<int>(graphs.size());
    for (int epoch = cfg.start_epoch; epoch < cfg.epochs; ++epoch) {
        std::vector<int> batch_ids;
        if (cfg.batch_size > 0 && cfg.batch_size < total_graphs) {
            std::vector<int> ids(total_graphs);
            for (int i = 0; i < total_graphs; ++i) ids[i] = i;
            std::mt19937_64 rng(derive_seed(cfg.seed, epoch, 0, 3));
            std::shuffle(ids.begin(), ids.end(), rng);
            batch_ids.assign(ids.begin(), ids.begin() + cfg.batch_size);
        } else {
            for (int i = 0; i < total_graphs; ++i) batch_ids.push_back(i);
        }

        std::vector<Graph> v1, v2;
        std::vector<Matrix> x1, x2, x1c, x2c;
        auto row_shuffle = [](const Matrix& x, std::uint64_t s) {
            std::vector<int> perm(x.rows());
            for (int i = 0; i < x.rows(); ++i) perm[i] = i;
            std::mt19937_64 rng(s);
            std::shuffle(perm.begin(), perm.end(), rng);
            Matrix out(x.rows(), x.cols());
            for (int i = 0; i < x.rows(); ++i) out.row(i) = x.row(perm[i]);
            return out;
        };
        for (int l : batch_ids) {
            const auto& scheme = schemes[l];
            PerturbationSample e1 = sample_perturbation(
                scheme.delta1, derive_seed(cfg.seed, epoch, l, 10));
            const ProbabilityMatrix& d2 =
                scheme.delta2 ? *scheme.delta2 : scheme.delta1;
            PerturbationSample e2 = sample_perturbation(
                d2, derive_seed(cfg.seed, epoch, l, 11));
            v1.push_back(apply_perturbation(graphs[l], dirs[l], e1));
            v2.push_back(apply_perturbation(graphs[l], dirs[l], e2));
            x1.push_back(feature_mask(features[l], cfg.feature_mask_ratio,
                                      derive_seed(cfg.seed, epoch, l, 12)));
            x2.push_back(feature_mask(features[l], cfg.feature_mask_ratio,
                                      derive_seed(cfg.seed, epoch, l, 13)));
            if (cfg.negatives == NegativeMode::kCorrupted) {
                x1c.push_back(row_shuffle(
                    x1.back(), derive_seed(cfg.seed, epoch, l, 14)));
                x2c.push_back(row_shuffle(
                    x2.back(), derive_seed(cfg.seed, epoch, l, 15)));
            }
        }

        GclGradients grads;
        double loss = gcl_loss_and_grad(
            v1, v2, x1, x2, enc, rd, &grads, cfg.negatives,
            x1c.empty() ? nullptr : &x1c, x2c.empty() ? nullptr : &x2c);
        if (!std::isfinite(loss))
            throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                     std::to_string(epoch));
        result.loss_curve.push_back(loss);

        if (cfg.use_adam) {
            ++adam_t;
            double corr1 = 1.0 - std::pow(beta1, adam_t);
            double corr2 = 1.0 - std::pow(beta2, adam_t);
            for (size_t l = 0; l < enc.layer_weights.size(); ++l) {
                m_w[l] = beta1 * m_w[l] + (1 - beta1) * grads.layer_grads[l];
                v_w[l] = beta2 * v_w[l] +
                         (1 - beta2) * grads.layer_grads[l].cwiseProduct(
                                           grads.layer_grads[l]);
                enc.layer_weights[l] -=
                    cfg.lr * (m_w[l] / corr1)
                        .cwiseQuotient(((v_w[l] / corr2).cwiseSqrt().array() +
                                        adam_eps)
                                           .matrix());
            }
            m_p = beta1 * m_p + (1 - beta1) * grads.proj_grad;
            v_p = beta2 * v_p +
                  (1 - beta2) * grads.proj_grad.cwiseProduct(grads.proj_grad);
            rd.proj -= cfg.lr * (m_p / corr1).cwiseQuotient(
                                    ((v_p / corr2).cwiseSqrt().array() +
                                     adam_eps)
                                        .matrix());
        } else {
            for (size_t l = 0; l < enc.layer_weights.size(); ++l)
                enc.layer_weights[l] -= cfg.lr * grads.layer_grads[l];
            rd.proj -= cfg.lr * grads.proj_grad;
        }
    }

    result.encoder = std::move(enc);
    result.readout_state = std::move(rd);
    return result;
}

namespace {

struct Split {
    std::vector<int> train, val, test;
};

Split make_split(int n, std::uint64_t seed) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    Split s;
    int n_train = static_cast<int>(0.6 * n);
    int n_val = static_cast<int>(0.2 * n);
    s.train.assign(idx.begin(), idx.begin() + n_train);
    s.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
    s.test.assign(idx.begin() + n_train + n_val, idx.end());
    return s;
}

const std::vector<double> kL2Grid = {0.001, 0.01, 0.1, 1.0, 10.0, 100.0};

// multinomial logistic regression by gradient descent with a Lipschitz step
Matrix fit_logistic(const Matrix& x, const std::vector<int>& y, int classes,
                    double l2) {
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    Matrix w = Matrix::Zero(d, classes);
    Matrix y_onehot = Matrix::Zero(n, classes);
    for (int i = 0; i < n; ++i) y_onehot(i, y[i]) = 1.0;

    // softmax-loss Hessian bound 1/2, so step 1 / (sigma_max^2/(2n) + l2)
    Eigen::SelfAdjointEigenSolver<Matrix> gram(x.transpose() * x);
    double lips = gram.eigenvalues().maxCoeff() / (2.0 * n) + l2;
    double step = 1.0 / std::max(lips, 1e-12);

    for (int it = 0; it < 5000; ++it) {
        Matrix scores = x * w;
        Matrix probs(n, classes);
        for (int i = 0; i < n; ++i) {
            double mx = scores.row(i).maxCoeff();
            Eigen::RowVectorXd e = (scores.row(i).array() - mx).exp();
            probs.row(i) = e / e.sum();
        }
        Matrix grad = x.transpose() * (probs - y_onehot) / double(n) + l2 * w;
        if (grad.norm() < 1e-6) break;
        w -= step * grad;
    }
    return w;
}

double logistic_accuracy(const Matrix& x, const std::vector<int>& y,
                         const Matrix& w, const std::vector<int>& idx) {
    if (idx.empty()) return 0.0;
    int correct = 0;
    for (int i : idx) {
        Eigen::RowVectorXd scores = x.row(i) * w;
        int pred = 0;
        scores.maxCoeff(&pred);
        if (pred == y[i]) ++correct;
    }
    return double(correct) / double(idx.size());
}

}  // namespace

ProbeResult linear_probe(const Matrix& reps, const std::vector<int>& labels,
                         std::uint64_t split_seed) {
    const int n = static_cast<int>(reps.rows());
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("labels length mismatch");
    int classes = *std::max_element(labels.begin(), labels.end()) + 1;

    Split split = make_split(n, split_seed);

    // standardize on train-split statistics so the l2 grid and the
    // Lipschitz step are meaningful regardless of representation scale
    Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(reps.cols());
    for (int i : split.train) mu += reps.row(i);
    mu /= double(split.train.size());
    Eigen::RowVectorXd sd = Eigen::RowVectorXd::Zero(reps.cols());
    for (int i : split.train)
        sd += (reps.row(i) - mu).cwiseProduct(reps.row(i) - mu);
    sd = (sd / double(split.train.size())).cwiseSqrt().cwiseMax(1e-12);

    Matrix x(n, reps.cols() + 1);  // bias column
    x.leftCols(reps.cols()) =
        (reps.rowwise() - mu).array().rowwise() / sd.array();
    x.col(reps.cols()).setOnes();
    std::vector<int> seen;
    for (int i : split.train) seen.push_back(labels[i]);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    if (seen.size() < 2)
        throw std::invalid_argument("train split has a single class");

    Matrix x_train(static_cast<int>(split.train.size()), x.cols());
    std::vector<int> y_train;
    for (size_t i = 0; i < split.train.size(); ++i) {
        x_train.row(static_cast<int>(i)) = x.row(split.train[i]);
        y_train.push_back(labels[split.train[i]]);
    }

    double best_val = -1.0, best_l2 = kL2Grid.front();
    Matrix best_w;
    for (double l2 : kL2Grid) {
        Matrix w = fit_logistic(x_train, y_train, classes, l2);
        double val = logistic_accuracy(x, labels, w, split.val);
        if (val > best_val) {
            best_val = val;
            best_l2 = l2;
            best_w = w;
        }
    }
    return {logistic_accuracy(x, labels, best_w, split.test), best_l2};
}

ProbeResult ridge_probe(const Matrix& reps, const Vector& targets,
                        std::uint64_t split_seed) {
    const int n = static_cast<int>(reps.rows());
    if (targets.size() != n)
        throw std::invalid_argument("targets length mismatch");
    Split split = make_split(n, split_seed);

    Matrix x_train(static_cast<int>(split.train.size()), reps.cols());
    Vector y_train(static_cast<int>(split.train.size()));
    for (size_t i = 0; i < split.train.size(); ++i) {
        x_train.row(static_cast<int>(i)) = reps.row(split.train[i]);
        y_train(static_cast<int>(i)) = targets(split.train[i]);
    }
    Eigen::RowVectorXd x_mean = x_train.colwise().mean();
    double y_mean = y_train.mean();
    Matrix xc = x_train.rowwise() - x_mean;
    Vector yc = y_train.array() - y_mean;

    auto rmse_on = [&](const Vector& w, const std::vector<int>& idx) {
        if (idx.empty()) return 0.0;
        double acc = 0.0;
        for (int i : idx) {
            double pred = (reps.row(i) - x_mean).dot(w) + y_mean;
            double err = pred - targets(i);
            acc += err * err;
        }
        return std::sqrt(acc / double(idx.size()));
    };

    double best_val = std::numeric_limits<double>::max();
    double best_l2 = kL2Grid.front();
    Vector best_w;
    const int d = static_cast<int>(reps.cols());
    for (double l2 : kL2Grid) {
        Matrix a = xc.transpose() * xc + l2 * Matrix::Identity(d, d);
        Vector w = a.ldlt().solve(xc.transpose() * yc);
        double val = rmse_on(w, split.val);
        if (val < best_val) {
            best_val = val;
            best_l2 = l2;
            best_w = w;
        }
    }
    return {rmse_on(best_w, split.test), best_l2};
}

Matrix one_hot_degree_features(const Graph& g, int max_bins) {
    Vector d = degrees(g);
    Matrix x = Matrix::Zero(g.n, max_bins);
    for (int i = 0; i < g.n; ++i) {
        int bin = std::min(max_bins - 1,
                           static_cast<int>(std::lround(d(i))));
        x(i, bin) = 1.0;
    }
    return x;
}

namespace {

json matrix_to_json(const Matrix& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    json data = json::array();
    for (int i = 0; i < m.rows(); ++i)
        for (int c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
    j["data"] = data;
    return j;
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
    const auto& data = j.at("data");
    int idx = 0;
    for (int i = 0; i < m.rows(); ++i)
        for (int c = 0; c < m.cols(); ++c) m(i, c) = data[idx++];
    return m;
}

}  // namespace

std::string checkpoint_to_json(const EncoderState& enc,
                               const ReadoutState& r) {
    json j;
    j["conv_kind"] = enc.conv_kind == ConvKind::kGcn ? "gcn" : "gin";
    j["gin_epsilon"] = enc.gin_epsilon;
    json layers = json::array();
    for (const auto& w : enc.layer_weights) layers.push_back(matrix_to_json(w));
    j["layers"] = layers;
    j["pool"] = r.pool == PoolKind::kMean ? "mean" : "sum";
    j["proj"] = matrix_to_json(r.proj);
    return j.dump(2);
}

void checkpoint_from_json(const std::string& text, EncoderState* enc,
                          ReadoutState* r) {
    json j = json::parse(text);
    enc->conv_kind =
        j.at("conv_kind") == "gcn" ? ConvKind::kGcn : ConvKind::kGin;
    enc->gin_epsilon = j.at("gin_epsilon");
    enc->layer_weights.clear();
    for (const auto& w : j.at("layers"))
        enc->layer_weights.push_back(matrix_from_json(w));
    r->pool = j.at("pool") == "mean" ? PoolKind::kMean : PoolKind::kSum;
    r->proj = matrix_from_json(j.at("proj"));
}

}  // namespace specaug
