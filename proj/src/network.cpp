#include "deepmap/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

#include "deepmap/errors.hpp"
#include "deepmap/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace deepmap {

const std::array<const char *, Model::group_count> Model::group_names = {
    "conv1_w", "conv1_b", "conv2_w", "conv2_b", "conv3_w",
    "conv3_b", "dense1_w", "dense1_b", "dense2_w", "dense2_b"};

std::array<std::vector<double> *, Model::group_count> Model::param_groups() {
    return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &conv3_w,
            &conv3_b, &dense1_w, &dense1_b, &dense2_w, &dense2_b};
}

std::array<const std::vector<double> *, Model::group_count> Model::param_groups() const {
    return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &conv3_w,
            &conv3_b, &dense1_w, &dense1_b, &dense2_w, &dense2_b};
}

std::size_t Model::parameter_count() const {
    std::size_t total = 0;
    for (const auto *group : param_groups())
        total += group->size();
    return total;
}

namespace {

void check_config(const ModelConfig &c) {
    if (c.input_dim < 1 || c.field_size < 1 || c.sequence_len < 1 || c.class_count < 1)
        throw ArgumentError("model config: nonsensical dimensions");
    for (int ch : c.conv_channels)
        if (ch < 1)
            throw ArgumentError("model config: conv channels must be >= 1");
    if (!(c.dropout_rate >= 0.0 && c.dropout_rate < 1.0))
        throw ArgumentError("model config: dropout rate must lie in [0, 1)");
}

void glorot_fill(std::vector<double> &w, int fan_in, int fan_out, std::mt19937_64 &eng) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double &x : w)
        x = (2.0 * next_double(eng) - 1.0) * limit;
}

} // namespace

Model init_model(const ModelConfig &config, std::uint64_t seed, bool random_biases) {
    check_config(config);
    Model m;
    m.config = config;
    const auto [c1, c2, c3] = config.conv_channels;
    const int in1 = config.conv1_inputs();
    m.conv1_w.resize(static_cast<std::size_t>(in1) * static_cast<std::size_t>(c1));
    m.conv1_b.resize(static_cast<std::size_t>(c1));
    m.conv2_w.resize(static_cast<std::size_t>(c1) * static_cast<std::size_t>(c2));
    m.conv2_b.resize(static_cast<std::size_t>(c2));
    m.conv3_w.resize(static_cast<std::size_t>(c2) * static_cast<std::size_t>(c3));
    m.conv3_b.resize(static_cast<std::size_t>(c3));
    m.dense1_w.resize(static_cast<std::size_t>(c3) * static_cast<std::size_t>(config.dense_units));
    m.dense1_b.resize(static_cast<std::size_t>(config.dense_units));
    m.dense2_w.resize(static_cast<std::size_t>(config.dense_units) *
                      static_cast<std::size_t>(config.class_count));
    m.dense2_b.resize(static_cast<std::size_t>(config.class_count));

    const int fan_ins[5] = {in1, c1, c2, c3, config.dense_units};
    const int fan_outs[5] = {c1, c2, c3, config.dense_units, config.class_count};
    auto groups = m.param_groups();
    for (int t = 0; t < 5; ++t) {
        auto eng = keyed_rng(seed, static_cast<std::uint64_t>(t));
        glorot_fill(*groups[static_cast<std::size_t>(2 * t)], fan_ins[t], fan_outs[t], eng);
        if (random_biases)
            glorot_fill(*groups[static_cast<std::size_t>(2 * t + 1)], fan_ins[t], fan_outs[t], eng);
    }
    m.dropout_seed = splitmix64(seed ^ 0x517cc1b727220a95ULL);
    m.dropout_counter = 0;
    return m;
}

// --- Forward / backward ------------------------------------------------------

struct ForwardCache {
    int b = 0, w = 0;
    bool train_mode = false;
    std::vector<double> h1, h2, h3;      // b x w x channel, post-ReLU
    std::vector<double> pooled;          // b x c3
    std::vector<double> d1;              // b x dense_units, post-ReLU
    std::vector<double> dropout_scale;   // b x dense_units (1/(1-p) or 0); empty in eval
    std::vector<double> d1_dropped;      // b x dense_units (after dropout)
    std::vector<double> probs;           // b x C
    const AlignedTensor *tensor = nullptr;
    std::vector<int> indices;
};

namespace {

void check_batch(const Model &model, const Batch &batch) {
    const auto &c = model.config;
    if (batch.tensor == nullptr)
        throw ArgumentError("forward: batch has no tensor");
    if (batch.tensor->m != c.input_dim || batch.tensor->r != c.field_size ||
        batch.tensor->w != c.sequence_len)
        throw ArgumentError("forward: tensor shape does not match the model config");
    for (int i : batch.indices)
        if (i < 0 || i >= batch.tensor->n)
            throw ArgumentError("forward: batch index out of range");
}

// one kernel-length-1 conv layer + ReLU over all positions of all graphs
void conv_pointwise(const std::vector<double> &in, int positions, int cin, int cout,
                    const std::vector<double> &w, const std::vector<double> &bias,
                    std::vector<double> &out) {
    out.assign(static_cast<std::size_t>(positions) * static_cast<std::size_t>(cout), 0.0);
    for (int p = 0; p < positions; ++p) {
        const double *x = in.data() + static_cast<std::size_t>(p) * static_cast<std::size_t>(cin);
        double *y = out.data() + static_cast<std::size_t>(p) * static_cast<std::size_t>(cout);
        for (int o = 0; o < cout; ++o)
            y[o] = bias[static_cast<std::size_t>(o)];
        for (int i = 0; i < cin; ++i) {
            const double xi = x[i];
            if (xi == 0.0)
                continue;
            const double *wrow = w.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(cout);
            for (int o = 0; o < cout; ++o)
                y[o] += xi * wrow[o];
        }
        for (int o = 0; o < cout; ++o)
            y[o] = std::max(y[o], 0.0);
    }
}

} // namespace

ForwardResult forward(Model &model, const Batch &batch, bool train_mode) {
    check_batch(model, batch);
    const auto &cfg = model.config;
    const auto [c1, c2, c3] = cfg.conv_channels;
    const int b = static_cast<int>(batch.indices.size());
    const int w = cfg.sequence_len, r = cfg.field_size;
    const int du = cfg.dense_units, C = cfg.class_count;

    auto cache = std::make_shared<ForwardCache>();
    cache->b = b;
    cache->w = w;
    cache->train_mode = train_mode;
    cache->tensor = batch.tensor;
    cache->indices = batch.indices;

    const int positions = b * w;
    // conv1: kernel length r, stride r — each block of r sparse rows maps to
    // one output position; cost is proportional to the nonzeros
    cache->h1.assign(static_cast<std::size_t>(positions) * static_cast<std::size_t>(c1), 0.0);
    for (int i = 0; i < b; ++i) {
        const auto &rows = batch.tensor->rows[static_cast<std::size_t>(batch.indices[static_cast<std::size_t>(i)])];
        for (int s = 0; s < w; ++s) {
            double *y = cache->h1.data() +
                        (static_cast<std::size_t>(i) * static_cast<std::size_t>(w) + static_cast<std::size_t>(s)) *
                            static_cast<std::size_t>(c1);
            for (int o = 0; o < c1; ++o)
                y[o] = model.conv1_b[static_cast<std::size_t>(o)];
            for (int j = 0; j < r; ++j) {
                const SparseRow &row = rows[static_cast<std::size_t>(s * r + j)];
                const std::size_t base = static_cast<std::size_t>(j) * static_cast<std::size_t>(cfg.input_dim);
                for (auto [col, value] : row) {
                    const double *wrow = model.conv1_w.data() +
                                         (base + static_cast<std::size_t>(col)) * static_cast<std::size_t>(c1);
                    for (int o = 0; o < c1; ++o)
                        y[o] += value * wrow[o];
                }
            }
            for (int o = 0; o < c1; ++o)
                y[o] = std::max(y[o], 0.0);
        }
    }

    conv_pointwise(cache->h1, positions, c1, c2, model.conv2_w, model.conv2_b, cache->h2);
    conv_pointwise(cache->h2, positions, c2, c3, model.conv3_w, model.conv3_b, cache->h3);

    // summation readout over the w positions
    cache->pooled.assign(static_cast<std::size_t>(b) * static_cast<std::size_t>(c3), 0.0);
    for (int i = 0; i < b; ++i)
        for (int s = 0; s < w; ++s) {
            const double *x = cache->h3.data() +
                              (static_cast<std::size_t>(i) * static_cast<std::size_t>(w) + static_cast<std::size_t>(s)) *
                                  static_cast<std::size_t>(c3);
            double *y = cache->pooled.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(c3);
            for (int o = 0; o < c3; ++o)
                y[o] += x[o];
        }

    // dense1 + ReLU
    cache->d1.assign(static_cast<std::size_t>(b) * static_cast<std::size_t>(du), 0.0);
    for (int i = 0; i < b; ++i) {
        const double *x = cache->pooled.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(c3);
        double *y = cache->d1.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(du);
        for (int o = 0; o < du; ++o)
            y[o] = model.dense1_b[static_cast<std::size_t>(o)];
        for (int k = 0; k < c3; ++k) {
            const double xk = x[k];
            const double *wrow = model.dense1_w.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(du);
            for (int o = 0; o < du; ++o)
                y[o] += xk * wrow[o];
        }
        for (int o = 0; o < du; ++o)
            y[o] = std::max(y[o], 0.0);
    }

    // inverted dropout: scale kept units by 1/(1-rate) at train time only
    cache->d1_dropped = cache->d1;
    if (train_mode && cfg.dropout_rate > 0.0) {
        cache->dropout_scale.assign(static_cast<std::size_t>(b) * static_cast<std::size_t>(du), 0.0);
        auto eng = keyed_rng(model.dropout_seed, model.dropout_counter++);
        const double keep_scale = 1.0 / (1.0 - cfg.dropout_rate);
        for (std::size_t x = 0; x < cache->dropout_scale.size(); ++x) {
            if (next_double(eng) >= cfg.dropout_rate)
                cache->dropout_scale[x] = keep_scale;
            cache->d1_dropped[x] *= cache->dropout_scale[x];
        }
    }

    ForwardResult result;
    result.logits.assign(static_cast<std::size_t>(b) * static_cast<std::size_t>(C), 0.0);
    for (int i = 0; i < b; ++i) {
        const double *x = cache->d1_dropped.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(du);
        double *y = result.logits.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(C);
        for (int o = 0; o < C; ++o)
            y[o] = model.dense2_b[static_cast<std::size_t>(o)];
        for (int k = 0; k < du; ++k) {
            const double xk = x[k];
            const double *wrow = model.dense2_w.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(C);
            for (int o = 0; o < C; ++o)
                y[o] += xk * wrow[o];
        }
    }
    result.cache = std::move(cache);
    return result;
}

namespace {

// softmax cross-entropy; fills probs (b x C) and returns the mean loss
double softmax_cross_entropy(const std::vector<double> &logits, const std::vector<int> &targets,
                             int C, std::vector<double> &probs) {
    const int b = static_cast<int>(targets.size());
    probs.assign(logits.size(), 0.0);
    double total = 0.0;
    for (int i = 0; i < b; ++i) {
        const double *z = logits.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(C);
        double *p = probs.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(C);
        double zmax = -std::numeric_limits<double>::infinity();
        for (int o = 0; o < C; ++o)
            zmax = std::max(zmax, z[o]);
        double sum = 0.0;
        for (int o = 0; o < C; ++o)
            sum += std::exp(z[o] - zmax);
        const double lse = zmax + std::log(sum);
        for (int o = 0; o < C; ++o)
            p[o] = std::exp(z[o] - lse);
        total += lse - z[targets[static_cast<std::size_t>(i)]];
    }
    return total / b;
}

int argmax_row(const double *row, int C) {
    int best = 0;
    for (int o = 1; o < C; ++o)
        if (row[o] > row[best])
            best = o;
    return best;
}

} // namespace

LossResult loss_and_gradients(Model &model, const Batch &batch, const std::vector<int> &targets,
                              bool train_mode, Gradients &grads) {
    if (targets.size() != batch.indices.size())
        throw ArgumentError("loss_and_gradients: target count != batch size");
    const auto &cfg = model.config;
    const int C = cfg.class_count;
    for (int t : targets)
        if (t < 0 || t >= C)
            throw ArgumentError("loss_and_gradients: target class out of range");

    ForwardResult fwd = forward(model, batch, train_mode);
    ForwardCache &cache = *fwd.cache;
    const auto [c1, c2, c3] = cfg.conv_channels;
    const int b = cache.b, w = cache.w, r = cfg.field_size, du = cfg.dense_units;

    LossResult result;
    result.logits = fwd.logits;
    result.loss = softmax_cross_entropy(fwd.logits, targets, C, cache.probs);
    int correct = 0;
    for (int i = 0; i < b; ++i)
        correct += argmax_row(fwd.logits.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(C), C) ==
                   targets[static_cast<std::size_t>(i)];
    result.accuracy = static_cast<double>(correct) / b;

    auto model_groups = model.param_groups();
    for (int g = 0; g < Model::group_count; ++g)
        grads.groups[static_cast<std::size_t>(g)].assign(model_groups[static_cast<std::size_t>(g)]->size(), 0.0);
    auto &[g_c1w, g_c1b, g_c2w, g_c2b, g_c3w, g_c3b, g_d1w, g_d1b, g_d2w, g_d2b] = grads.groups;

    // dlogits = (probs - onehot) / b
    std::vector<double> dlogits = cache.probs;
    for (int i = 0; i < b; ++i)
        dlogits[static_cast<std::size_t>(i) * static_cast<std::size_t>(C) +
                static_cast<std::size_t>(targets[static_cast<std::size_t>(i)])] -= 1.0;
    for (double &x : dlogits)
        x /= b;

    // dense2 backward
    std::vector<double> dd1(static_cast<std::size_t>(b) * static_cast<std::size_t>(du), 0.0);
    for (int i = 0; i < b; ++i) {
        const double *x = cache.d1_dropped.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(du);
        const double *dy = dlogits.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(C);
        double *dx = dd1.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(du);
        for (int o = 0; o < C; ++o)
            g_d2b[static_cast<std::size_t>(o)] += dy[o];
        for (int k = 0; k < du; ++k) {
            const double *wrow = model.dense2_w.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(C);
            double *gwrow = g_d2w.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(C);
            double acc = 0.0;
            for (int o = 0; o < C; ++o) {
                gwrow[o] += x[k] * dy[o];
                acc += wrow[o] * dy[o];
            }
            dx[k] = acc;
        }
    }

    // dropout backward (mask reused from the forward cache), then ReLU
    if (cache.train_mode && cfg.dropout_rate > 0.0)
        for (std::size_t x = 0; x < dd1.size(); ++x)
            dd1[x] *= cache.dropout_scale[x];
    for (std::size_t x = 0; x < dd1.size(); ++x)
        if (cache.d1[x] <= 0.0)
            dd1[x] = 0.0;

    // dense1 backward
    std::vector<double> dpooled(static_cast<std::size_t>(b) * static_cast<std::size_t>(c3), 0.0);
    for (int i = 0; i < b; ++i) {
        const double *x = cache.pooled.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(c3);
        const double *dy = dd1.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(du);
        double *dx = dpooled.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(c3);
        for (int o = 0; o < du; ++o)
            g_d1b[static_cast<std::size_t>(o)] += dy[o];
        for (int k = 0; k < c3; ++k) {
            const double *wrow = model.dense1_w.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(du);
            double *gwrow = g_d1w.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(du);
            double acc = 0.0;
            for (int o = 0; o < du; ++o) {
                gwrow[o] += x[k] * dy[o];
                acc += wrow[o] * dy[o];
            }
            dx[k] = acc;
        }
    }

    // summation backward broadcasts to every position, then conv3 ReLU mask
    const int positions = b * w;
    std::vector<double> dh3(static_cast<std::size_t>(positions) * static_cast<std::size_t>(c3));
    for (int i = 0; i < b; ++i)
        for (int s = 0; s < w; ++s) {
            const double *dy = dpooled.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(c3);
            double *dx = dh3.data() +
                         (static_cast<std::size_t>(i) * static_cast<std::size_t>(w) + static_cast<std::size_t>(s)) *
                             static_cast<std::size_t>(c3);
            for (int o = 0; o < c3; ++o)
                dx[o] = dy[o];
        }
    for (std::size_t x = 0; x < dh3.size(); ++x)
        if (cache.h3[x] <= 0.0)
            dh3[x] = 0.0;

    // pointwise conv backward helper
    auto conv_backward = [&](const std::vector<double> &input, const std::vector<double> &dout,
                             const std::vector<double> &weights, int cin, int cout,
                             std::vector<double> &gw, std::vector<double> &gb,
                             std::vector<double> &din, const std::vector<double> &relu_ref) {
        din.assign(static_cast<std::size_t>(positions) * static_cast<std::size_t>(cin), 0.0);
        for (int p = 0; p < positions; ++p) {
            const double *x = input.data() + static_cast<std::size_t>(p) * static_cast<std::size_t>(cin);
            const double *dy = dout.data() + static_cast<std::size_t>(p) * static_cast<std::size_t>(cout);
            double *dx = din.data() + static_cast<std::size_t>(p) * static_cast<std::size_t>(cin);
            for (int o = 0; o < cout; ++o)
                gb[static_cast<std::size_t>(o)] += dy[o];
            for (int i2 = 0; i2 < cin; ++i2) {
                const double *wrow = weights.data() + static_cast<std::size_t>(i2) * static_cast<std::size_t>(cout);
                double *gwrow = gw.data() + static_cast<std::size_t>(i2) * static_cast<std::size_t>(cout);
                double acc = 0.0;
                for (int o = 0; o < cout; ++o) {
                    gwrow[o] += x[i2] * dy[o];
                    acc += wrow[o] * dy[o];
                }
                dx[i2] = acc;
            }
        }
        for (std::size_t x = 0; x < din.size(); ++x)
            if (relu_ref[x] <= 0.0)
                din[x] = 0.0;
    };

    std::vector<double> dh2, dh1;
    conv_backward(cache.h2, dh3, model.conv3_w, c2, c3, g_c3w, g_c3b, dh2, cache.h2);
    conv_backward(cache.h1, dh2, model.conv2_w, c1, c2, g_c2w, g_c2b, dh1, cache.h1);

    // conv1 backward: sparse rows make this nonzero-proportional
    for (int i = 0; i < b; ++i) {
        const auto &rows = batch.tensor->rows[static_cast<std::size_t>(batch.indices[static_cast<std::size_t>(i)])];
        for (int s = 0; s < w; ++s) {
            const double *dz = dh1.data() +
                               (static_cast<std::size_t>(i) * static_cast<std::size_t>(w) + static_cast<std::size_t>(s)) *
                                   static_cast<std::size_t>(c1);
            for (int o = 0; o < c1; ++o)
                g_c1b[static_cast<std::size_t>(o)] += dz[o];
            for (int j = 0; j < r; ++j) {
                const SparseRow &row = rows[static_cast<std::size_t>(s * r + j)];
                const std::size_t base = static_cast<std::size_t>(j) * static_cast<std::size_t>(cfg.input_dim);
                for (auto [col, value] : row) {
                    double *gwrow = g_c1w.data() +
                                    (base + static_cast<std::size_t>(col)) * static_cast<std::size_t>(c1);
                    for (int o = 0; o < c1; ++o)
                        gwrow[o] += value * dz[o];
                }
            }
        }
    }
    return result;
}

void rmsprop_step(Model &model, const Gradients &grads, RmspropState &state, double lr,
                  double rho, double eps) {
    auto groups = model.param_groups();
    for (int g = 0; g < Model::group_count; ++g) {
        const auto &grad = grads.groups[static_cast<std::size_t>(g)];
        if (grad.size() != groups[static_cast<std::size_t>(g)]->size())
            throw ArgumentError("rmsprop_step: gradient shape mismatch");
        for (double x : grad)
            if (!std::isfinite(x))
                throw TrainingError(std::string("non-finite gradient in ") +
                                    Model::group_names[static_cast<std::size_t>(g)] +
                                    "; step aborted");
    }
    for (int g = 0; g < Model::group_count; ++g) {
        auto &param = *groups[static_cast<std::size_t>(g)];
        const auto &grad = grads.groups[static_cast<std::size_t>(g)];
        auto &acc = state.accumulators[static_cast<std::size_t>(g)];
        if (acc.size() != param.size())
            acc.assign(param.size(), 0.0);
        for (std::size_t i = 0; i < param.size(); ++i) {
            acc[i] = rho * acc[i] + (1.0 - rho) * grad[i] * grad[i];
            param[i] -= lr * grad[i] / (std::sqrt(acc[i]) + eps);
        }
    }
}

PlateauScheduler::PlateauScheduler(double initial_lr, double decay_factor, int patience)
    : lr_(initial_lr), decay_(decay_factor), patience_(patience),
      best_(std::numeric_limits<double>::infinity()) {
    if (patience < 1)
        throw ArgumentError("plateau scheduler: patience must be >= 1");
}

double PlateauScheduler::update(double epoch_loss) {
    if (epoch_loss < best_) {
        best_ = epoch_loss;
        stale_ = 0;
    } else if (++stale_ == patience_) {
        lr_ *= decay_;
        stale_ = 0;
    }
    return lr_;
}

std::vector<EpochStats> train(Model &model, const AlignedTensor &tensor,
                              const std::vector<int> &labels, const TrainConfig &config,
                              const EpochCallback &on_epoch_end) {
    if (tensor.n < 1)
        throw ArgumentError("train: empty dataset");
    if (static_cast<std::int64_t>(labels.size()) != tensor.n)
        throw ArgumentError("train: label count != tensor graph count");
    if (config.batch_size < 1)
        throw ArgumentError("train: batch_size must be >= 1");
    if (config.max_epochs < 0)
        throw ArgumentError("train: max_epochs must be >= 0");

    PlateauScheduler scheduler(config.learning_rate, config.decay_factor, config.patience);
    RmspropState state;
    Gradients grads;
    auto eng = keyed_rng(config.seed, 0x734c6e); // shuffle stream
    std::vector<int> order(static_cast<std::size_t>(tensor.n));
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<int>(i);

    std::vector<EpochStats> history;
    history.reserve(static_cast<std::size_t>(config.max_epochs));
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        shuffle(order, eng);
        double loss_sum = 0.0, acc_sum = 0.0;
        Batch batch;
        batch.tensor = &tensor;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            batch.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                                 order.begin() + static_cast<std::ptrdiff_t>(end));
            std::vector<int> targets(batch.indices.size());
            for (std::size_t i = 0; i < batch.indices.size(); ++i)
                targets[i] = labels[static_cast<std::size_t>(batch.indices[i])];
            LossResult r = loss_and_gradients(model, batch, targets, true, grads);
            rmsprop_step(model, grads, state, scheduler.lr(), config.rmsprop_rho,
                         config.rmsprop_eps);
            const double weight = static_cast<double>(batch.indices.size());
            loss_sum += r.loss * weight;
            acc_sum += r.accuracy * weight;
        }
        EpochStats stats;
        stats.epoch = epoch + 1; // epochs are 1-based in reports
        stats.loss = loss_sum / static_cast<double>(tensor.n);
        stats.accuracy = acc_sum / static_cast<double>(tensor.n);
        stats.lr = scheduler.update(stats.loss);
        history.push_back(stats);
        if (on_epoch_end)
            on_epoch_end(epoch + 1, model);
    }
    return history;
}

Prediction predict(Model &model, const AlignedTensor &tensor) {
    Prediction pred;
    const int C = model.config.class_count;
    pred.probabilities.reserve(static_cast<std::size_t>(tensor.n) * static_cast<std::size_t>(C));
    pred.classes.reserve(static_cast<std::size_t>(tensor.n));
    const int chunk = 256;
    Batch batch;
    batch.tensor = &tensor;
    std::vector<double> probs;
    for (std::int64_t start = 0; start < tensor.n; start += chunk) {
        const std::int64_t end = std::min(tensor.n, start + chunk);
        batch.indices.resize(static_cast<std::size_t>(end - start));
        for (std::int64_t i = start; i < end; ++i)
            batch.indices[static_cast<std::size_t>(i - start)] = static_cast<int>(i);
        ForwardResult fwd = forward(model, batch, false);
        std::vector<int> dummy_targets(batch.indices.size(), 0);
        softmax_cross_entropy(fwd.logits, dummy_targets, C, probs);
        for (std::size_t i = 0; i < batch.indices.size(); ++i) {
            const double *row = probs.data() + i * static_cast<std::size_t>(C);
            pred.classes.push_back(argmax_row(row, C));
            pred.probabilities.insert(pred.probabilities.end(), row, row + C);
        }
    }
    return pred;
}

double accuracy_of(const std::vector<int> &predicted, const std::vector<int> &expected) {
    if (predicted.size() != expected.size() || predicted.empty())
        throw ArgumentError("accuracy_of: size mismatch");
    int correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        correct += predicted[i] == expected[i];
    return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

// --- Gradient verification ---------------------------------------------------

GradCheckReport grad_check(const ModelConfig &config, std::uint64_t seed, double tolerance,
                           int corrupt_group, bool zero_input, double step) {
    Model model = init_model(config, seed, /*random_biases=*/true);
    if (model.parameter_count() > 5000)
        throw ArgumentError("grad_check: config too large (" +
                            std::to_string(model.parameter_count()) + " parameters > 5000)");

    // random dense batch with positive and negative entries (dead ReLUs occur
    // naturally); zero_input leaves every row empty instead
    const int b = 3;
    AlignedTensor tensor;
    tensor.n = b;
    tensor.w = config.sequence_len;
    tensor.r = config.field_size;
    tensor.m = config.input_dim;
    tensor.rows.resize(static_cast<std::size_t>(b));
    auto eng = keyed_rng(seed, 0xda7a);
    std::vector<int> targets(static_cast<std::size_t>(b));
    for (int i = 0; i < b; ++i) {
        tensor.rows[static_cast<std::size_t>(i)].resize(
            static_cast<std::size_t>(tensor.w * tensor.r));
        if (!zero_input)
            for (auto &row : tensor.rows[static_cast<std::size_t>(i)])
                for (int col = 0; col < config.input_dim; ++col)
                    row.emplace_back(col, 2.0 * next_double(eng) - 1.0);
        targets[static_cast<std::size_t>(i)] =
            static_cast<int>(next_index(eng, static_cast<std::uint64_t>(config.class_count)));
    }
    Batch batch;
    batch.tensor = &tensor;
    batch.indices = {0, 1, 2};

    Gradients analytic;
    loss_and_gradients(model, batch, targets, false, analytic);
    if (corrupt_group >= 0 && corrupt_group < Model::group_count)
        for (double &g : analytic.groups[static_cast<std::size_t>(corrupt_group)])
            g *= 1.01;

    Gradients scratch;
    auto loss_at = [&]() {
        return loss_and_gradients(model, batch, targets, false, scratch).loss;
    };
    GradCheckReport report;
    auto groups = model.param_groups();
    for (int g = 0; g < Model::group_count; ++g) {
        auto &param = *groups[static_cast<std::size_t>(g)];
        double worst = 0.0;
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double saved = param[i];
            param[i] = saved + step;
            const double up = loss_at();
            param[i] = saved - step;
            const double down = loss_at();
            param[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double ga = analytic.groups[static_cast<std::size_t>(g)][i];
            const double scale = std::abs(ga) + std::abs(numeric);
            const double rel = scale < 1e-12 ? 0.0 : std::abs(ga - numeric) / scale;
            worst = std::max(worst, rel);
        }
        report.max_relative_error[static_cast<std::size_t>(g)] = worst;
        report.overall_max = std::max(report.overall_max, worst);
    }
    report.passed = report.overall_max < tolerance;
    return report;
}

// --- Serialization -----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'D', 'M', 'A', 'P', 'N', 'E', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ostream &out, const T &value) {
    out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream &in) {
    T value{};
    in.read(reinterpret_cast<char *>(&value), sizeof(T));
    if (!in)
        throw FormatError("checkpoint: truncated");
    return value;
}

} // namespace

void save_model(std::ostream &out, const Model &model) {
    out.write(kMagic, sizeof(kMagic));
    write_raw(out, kVersion);
    const auto &c = model.config;
    for (std::int64_t v : {static_cast<std::int64_t>(c.input_dim), static_cast<std::int64_t>(c.field_size),
                           static_cast<std::int64_t>(c.sequence_len), static_cast<std::int64_t>(c.conv_channels[0]),
                           static_cast<std::int64_t>(c.conv_channels[1]), static_cast<std::int64_t>(c.conv_channels[2]),
                           static_cast<std::int64_t>(c.dense_units), static_cast<std::int64_t>(c.class_count)})
        write_raw(out, v);
    write_raw(out, c.dropout_rate);
    write_raw(out, model.dropout_seed);
    write_raw(out, model.dropout_counter);
    for (const auto *group : model.param_groups()) {
        write_raw(out, static_cast<std::int64_t>(group->size()));
        out.write(reinterpret_cast<const char *>(group->data()),
                  static_cast<std::streamsize>(group->size() * sizeof(double)));
    }
    if (!out)
        throw Error("save_model: write failed");
}

Model load_model(std::istream &in) {
    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw FormatError("checkpoint: bad magic");
    if (read_raw<std::uint32_t>(in) != kVersion)
        throw FormatError("checkpoint: unsupported version");
    ModelConfig c;
    c.input_dim = static_cast<int>(read_raw<std::int64_t>(in));
    c.field_size = static_cast<int>(read_raw<std::int64_t>(in));
    c.sequence_len = static_cast<int>(read_raw<std::int64_t>(in));
    c.conv_channels[0] = static_cast<int>(read_raw<std::int64_t>(in));
    c.conv_channels[1] = static_cast<int>(read_raw<std::int64_t>(in));
    c.conv_channels[2] = static_cast<int>(read_raw<std::int64_t>(in));
    c.dense_units = static_cast<int>(read_raw<std::int64_t>(in));
    c.class_count = static_cast<int>(read_raw<std::int64_t>(in));
    c.dropout_rate = read_raw<double>(in);
    Model model = init_model(c, 0);
    model.dropout_seed = read_raw<std::uint64_t>(in);
    model.dropout_counter = read_raw<std::uint64_t>(in);
    for (auto *group : model.param_groups()) {
        const auto size = read_raw<std::int64_t>(in);
        if (size != static_cast<std::int64_t>(group->size()))
            throw FormatError("checkpoint: tensor size mismatch");
        in.read(reinterpret_cast<char *>(group->data()),
                static_cast<std::streamsize>(group->size() * sizeof(double)));
        if (!in)
            throw FormatError("checkpoint: truncated tensor");
    }
    return model;
}

void write_history_csv(std::ostream &out, const std::vector<EpochStats> &history) {
    out << "epoch,loss,accuracy,lr\n";
    out << std::setprecision(17);
    for (const auto &row : history)
        out << row.epoch << ',' << row.loss << ',' << row.accuracy << ',' << row.lr << '\n';
}

} // namespace deepmap
