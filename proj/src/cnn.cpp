#include "s4c/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace s4c::cnn {

namespace {

int idx3(int h, int w, int c, int y, int x) { return (c * h + y) * w + x; }

struct Map3 {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;

    Map3() = default;
    Map3(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(std::size_t(c_) * h_ * w_, 0.0) {}
    double at(int ci, int y, int x) const { return v[idx3(h, w, ci, y, x)]; }
    double& at(int ci, int y, int x) { return v[idx3(h, w, ci, y, x)]; }
};

struct Activations {
    std::vector<Map3> conv_in;    // input of each conv layer
    std::vector<Map3> conv_pre;   // pre-ReLU output of each conv layer
    std::vector<std::vector<int>> pool_arg;   // per block, argmax into pre-pool map
    std::vector<std::vector<char>> drop_mask;  // per block (empty when dropout off)
    std::vector<double> flat;
    Prediction probs{};
};

// Gradients share the model's tensor layout.
CnnModel zero_like(const CnnModel& model) {
    CnnModel g;
    g.config = model.config;
    g.convs.resize(model.convs.size());
    for (std::size_t i = 0; i < model.convs.size(); ++i) {
        g.convs[i].w = Tensor(model.convs[i].w.shape);
        g.convs[i].b = Tensor(model.convs[i].b.shape);
    }
    g.dense.w = Tensor(model.dense.w.shape);
    g.dense.b = Tensor(model.dense.b.shape);
    return g;
}

void conv_forward(const ConvLayer& layer, const Map3& in, Map3& pre) {
    const int co_n = layer.w.shape[0], ci_n = layer.w.shape[1];
    pre = Map3(co_n, in.h, in.w);
    for (int co = 0; co < co_n; ++co) {
        const double bias = layer.b.v[co];
        for (int y = 0; y < in.h; ++y) {
            for (int x = 0; x < in.w; ++x) {
                double acc = bias;
                for (int ci = 0; ci < ci_n; ++ci) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = y + ky - 1;
                        if (iy < 0 || iy >= in.h) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = x + kx - 1;
                            if (ix < 0 || ix >= in.w) continue;
                            acc += in.at(ci, iy, ix) *
                                   layer.w.v[((co * ci_n + ci) * 3 + ky) * 3 + kx];
                        }
                    }
                }
                pre.at(co, y, x) = acc;
            }
        }
    }
}

void conv_backward(const ConvLayer& layer, const Map3& in, const Map3& dout, Map3& din,
                   ConvLayer& grad) {
    const int co_n = layer.w.shape[0], ci_n = layer.w.shape[1];
    din = Map3(in.c, in.h, in.w);
    for (int co = 0; co < co_n; ++co) {
        double db = 0.0;
        for (int y = 0; y < in.h; ++y) {
            for (int x = 0; x < in.w; ++x) {
                const double g = dout.at(co, y, x);
                if (g == 0.0) continue;
                db += g;
                for (int ci = 0; ci < ci_n; ++ci) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = y + ky - 1;
                        if (iy < 0 || iy >= in.h) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = x + kx - 1;
                            if (ix < 0 || ix >= in.w) continue;
                            const std::size_t wi = ((std::size_t(co) * ci_n + ci) * 3 + ky) * 3 + kx;
                            grad.w.v[wi] += in.at(ci, iy, ix) * g;
                            din.at(ci, iy, ix) += layer.w.v[wi] * g;
                        }
                    }
                }
            }
        }
        grad.b.v[co] += db;
    }
}

void relu_inplace(Map3& m) {
    for (double& x : m.v) x = std::max(0.0, x);
}

void pool_forward(const Map3& in, Map3& out, std::vector<int>& argmax) {
    out = Map3(in.c, in.h / 2, in.w / 2);
    argmax.assign(out.v.size(), 0);
    for (int c = 0; c < in.c; ++c) {
        for (int y = 0; y < out.h; ++y) {
            for (int x = 0; x < out.w; ++x) {
                int best_idx = idx3(in.h, in.w, c, 2 * y, 2 * x);
                double best = in.v[best_idx];
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        const int idx = idx3(in.h, in.w, c, 2 * y + dy, 2 * x + dx);
                        if (in.v[idx] > best) {
                            best = in.v[idx];
                            best_idx = idx;
                        }
                    }
                }
                out.at(c, y, x) = best;
                argmax[idx3(out.h, out.w, c, y, x)] = best_idx;
            }
        }
    }
}

Prediction softmax(const std::array<double, kNumClasses>& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    Prediction p{};
    double sum = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
        p[c] = std::exp(logits[c] - m);
        sum += p[c];
    }
    for (double& x : p) x /= sum;
    return p;
}

Prediction run_forward(const CnnModel& model, const Tensor& input, const DropoutPolicy& policy,
                       Activations* act) {
    const ModelConfig& cfg = model.config;
    if (input.shape.size() != 2 || input.shape[0] != cfg.input_bands ||
        input.shape[1] != cfg.window_frames) {
        throw std::invalid_argument("input patch must be [input_bands][window_frames]");
    }

    Map3 cur(1, cfg.input_bands, cfg.window_frames);
    cur.v = input.v;

    const double keep_p = 1.0 - cfg.dropout_p;
    int conv_idx = 0;
    for (int block = 0; block < cfg.blocks; ++block) {
        for (int l = 0; l < cfg.layers_per_block; ++l, ++conv_idx) {
            Map3 pre;
            conv_forward(model.convs[conv_idx], cur, pre);
            if (act) {
                act->conv_in.push_back(cur);
                act->conv_pre.push_back(pre);
            }
            relu_inplace(pre);
            cur = std::move(pre);
        }
        Map3 pooled;
        std::vector<int> argmax;
        pool_forward(cur, pooled, argmax);
        if (act) act->pool_arg.push_back(std::move(argmax));

        if (policy.mode != DropoutPolicy::Mode::off && cfg.dropout_p > 0.0) {
            std::vector<char> mask;
            if (policy.mode == DropoutPolicy::Mode::sample) {
                if (!policy.rng) throw std::invalid_argument("sampling dropout needs an rng");
                mask.resize(pooled.v.size());
                std::uniform_real_distribution<double> uni(0.0, 1.0);
                for (auto& m : mask) m = uni(*policy.rng) < keep_p ? 1 : 0;
            } else {
                if (!policy.masks || policy.masks->size() != std::size_t(cfg.blocks)) {
                    throw std::invalid_argument("fixed dropout needs one mask per block");
                }
                mask = (*policy.masks)[block];
                if (mask.size() != pooled.v.size()) {
                    throw std::invalid_argument("fixed dropout mask has the wrong shape");
                }
            }
            for (std::size_t i = 0; i < pooled.v.size(); ++i) {
                pooled.v[i] = mask[i] ? pooled.v[i] / keep_p : 0.0;
            }
            if (act) act->drop_mask.push_back(std::move(mask));
        } else if (act) {
            act->drop_mask.emplace_back();
        }
        cur = std::move(pooled);
    }

    std::array<double, kNumClasses> logits{};
    const int features = static_cast<int>(cur.v.size());
    for (int c = 0; c < kNumClasses; ++c) {
        double acc = model.dense.b.v[c];
        const double* row = model.dense.w.v.data() + std::size_t(c) * features;
        for (int f = 0; f < features; ++f) acc += row[f] * cur.v[f];
        logits[c] = acc;
    }
    Prediction probs = softmax(logits);
    if (act) {
        act->flat = std::move(cur.v);
        act->probs = probs;
    }
    return probs;
}

void backward(const CnnModel& model, const Activations& act, int label, CnnModel& grad) {
    const ModelConfig& cfg = model.config;
    const double keep_p = 1.0 - cfg.dropout_p;
    const int features = static_cast<int>(act.flat.size());

    std::array<double, kNumClasses> dlogits{};
    for (int c = 0; c < kNumClasses; ++c) dlogits[c] = act.probs[c] - (c == label ? 1.0 : 0.0);

    std::vector<double> dflat(features, 0.0);
    for (int c = 0; c < kNumClasses; ++c) {
        grad.dense.b.v[c] += dlogits[c];
        double* grow = grad.dense.w.v.data() + std::size_t(c) * features;
        const double* wrow = model.dense.w.v.data() + std::size_t(c) * features;
        for (int f = 0; f < features; ++f) {
            grow[f] += dlogits[c] * act.flat[f];
            dflat[f] += wrow[f] * dlogits[c];
        }
    }

    const int hb = cfg.input_bands >> cfg.blocks;
    const int wb = cfg.window_frames >> cfg.blocks;
    Map3 dcur(cfg.blocks == 0 ? 1 : cfg.kernels, hb, wb);
    dcur.v = std::move(dflat);

    int conv_idx = cfg.blocks * cfg.layers_per_block - 1;
    for (int block = cfg.blocks - 1; block >= 0; --block) {
        if (!act.drop_mask[block].empty()) {
            const std::vector<char>& mask = act.drop_mask[block];
            for (std::size_t i = 0; i < dcur.v.size(); ++i) {
                dcur.v[i] = mask[i] ? dcur.v[i] / keep_p : 0.0;
            }
        }

        // Pool backward: gradients route to the recorded argmax positions.
        // The pre-pool map has the same shape as the block's last conv output.
        const Map3& pre_pool = act.conv_pre[std::size_t(conv_idx)];
        Map3 dpool(pre_pool.c, pre_pool.h, pre_pool.w);
        const std::vector<int>& argmax = act.pool_arg[block];
        for (std::size_t i = 0; i < dcur.v.size(); ++i) dpool.v[argmax[i]] += dcur.v[i];
        dcur = std::move(dpool);

        for (int l = cfg.layers_per_block - 1; l >= 0; --l, --conv_idx) {
            const Map3& pre = act.conv_pre[std::size_t(conv_idx)];
            for (std::size_t i = 0; i < dcur.v.size(); ++i) {
                if (pre.v[i] <= 0.0) dcur.v[i] = 0.0;
            }
            Map3 din;
            conv_backward(model.convs[std::size_t(conv_idx)], act.conv_in[std::size_t(conv_idx)],
                          dcur, din, grad.convs[std::size_t(conv_idx)]);
            dcur = std::move(din);
        }
    }
}

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("truncated model file");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

void write_tensor(std::ostream& out, const std::string& name, const Tensor& t) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) write_u32(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t.v.data()),
              static_cast<std::streamsize>(t.v.size() * sizeof(double)));
}

}  // namespace

const char* class_name(AudioClass c) {
    switch (c) {
        case AudioClass::cough: return "cough";
        case AudioClass::breath: return "breath";
        case AudioClass::voice: return "voice";
    }
    return "?";
}

std::optional<AudioClass> class_from_name(const std::string& name) {
    if (name == "cough") return AudioClass::cough;
    if (name == "breath") return AudioClass::breath;
    if (name == "voice") return AudioClass::voice;
    return std::nullopt;
}

Tensor::Tensor(std::vector<int> dims) : shape(std::move(dims)) {
    std::size_t n = 1;
    for (int d : shape) n *= std::size_t(std::max(0, d));
    v.assign(n, 0.0);
}

void validate_structure(const ModelConfig& cfg) {
    if (cfg.input_bands < 1 || cfg.window_frames < 1) {
        throw std::invalid_argument("input dimensions must be positive");
    }
    // blocks == 0 degenerates to a dense-only model, used by gradient tests.
    if (cfg.blocks < 0 || cfg.layers_per_block < 1 || cfg.kernels < 1) {
        throw std::invalid_argument("blocks, layers and kernels must be non-negative");
    }
    if (cfg.dropout_p < 0.0 || cfg.dropout_p >= 1.0) {
        throw std::invalid_argument("dropout probability must lie in [0, 1)");
    }
    const int div = 1 << cfg.blocks;
    if (cfg.input_bands % div != 0 || cfg.window_frames % div != 0) {
        throw std::invalid_argument("input axes must be divisible by 2^blocks");
    }
}

void validate_grid_config(const ModelConfig& cfg) {
    validate_structure(cfg);
    if (cfg.input_bands != 128) {
        throw std::invalid_argument("grid models use 128 mel bands");
    }
    if (cfg.window_frames < 128 || cfg.window_frames > 1024) {
        throw std::invalid_argument("window width must lie in [128, 1024]");
    }
    if (cfg.layers_per_block < 1 || cfg.layers_per_block > 3) {
        throw std::invalid_argument("layers per block must lie in [1, 3]");
    }
    if (cfg.kernels < 64 || cfg.kernels > 128) {
        throw std::invalid_argument("kernel count must lie in [64, 128]");
    }
    const int max_b = static_cast<int>(std::floor(std::log2(double(cfg.window_frames))));
    if (cfg.blocks < 3 || cfg.blocks > max_b) {
        throw std::invalid_argument("block count must lie in [3, log2(d)]");
    }
}

std::size_t CnnModel::parameter_count() const {
    std::size_t n = 0;
    for_each_tensor([&](const Tensor& t) { n += t.size(); });
    return n;
}

std::size_t closed_form_parameter_count(const ModelConfig& cfg) {
    const std::size_t k = cfg.kernels;
    const std::size_t hb = std::size_t(cfg.input_bands) >> cfg.blocks;
    const std::size_t wb = std::size_t(cfg.window_frames) >> cfg.blocks;
    if (cfg.blocks == 0) {
        return hb * wb * kNumClasses + kNumClasses;
    }
    std::size_t total = 9 * 1 * k + k;  // first conv sees one channel
    const std::size_t rest = std::size_t(cfg.blocks) * cfg.layers_per_block - 1;
    total += rest * (9 * k * k + k);
    total += hb * wb * k * kNumClasses + kNumClasses;
    return total;
}

CnnModel build_model(const ModelConfig& cfg, std::uint64_t seed, bool enforce_grid) {
    if (enforce_grid) {
        validate_grid_config(cfg);
    } else {
        validate_structure(cfg);
    }

    CnnModel model;
    model.config = cfg;
    std::mt19937_64 rng(seed);
    auto he_fill = [&rng](Tensor& t, int fan_in) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / std::max(1, fan_in)));
        for (double& x : t.v) x = dist(rng);
    };

    int in_channels = 1;
    for (int block = 0; block < cfg.blocks; ++block) {
        for (int l = 0; l < cfg.layers_per_block; ++l) {
            ConvLayer layer;
            layer.w = Tensor({cfg.kernels, in_channels, 3, 3});
            layer.b = Tensor({cfg.kernels});
            he_fill(layer.w, in_channels * 9);
            model.convs.push_back(std::move(layer));
            in_channels = cfg.kernels;
        }
    }
    const int out_channels = cfg.blocks == 0 ? 1 : cfg.kernels;
    const int features =
        (cfg.input_bands >> cfg.blocks) * (cfg.window_frames >> cfg.blocks) * out_channels;
    model.dense.w = Tensor({kNumClasses, features});
    model.dense.b = Tensor({kNumClasses});
    he_fill(model.dense.w, features);
    return model;
}

Prediction forward(const CnnModel& model, const Tensor& input, const DropoutPolicy& dropout) {
    return run_forward(model, input, dropout, nullptr);
}

std::vector<std::vector<char>> make_dropout_masks(const CnnModel& model, std::uint64_t seed) {
    const ModelConfig& cfg = model.config;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double keep_p = 1.0 - cfg.dropout_p;
    std::vector<std::vector<char>> masks(cfg.blocks);
    for (int block = 0; block < cfg.blocks; ++block) {
        const std::size_t size = std::size_t(cfg.kernels) *
                                 (cfg.input_bands >> (block + 1)) *
                                 (cfg.window_frames >> (block + 1));
        masks[block].resize(size);
        for (auto& m : masks[block]) m = uni(rng) < keep_p ? 1 : 0;
    }
    return masks;
}

TrainHistory train(CnnModel& model, const std::vector<TrainSample>& data,
                   const TrainConfig& cfg) {
    const int d = model.config.window_frames;
    TrainHistory history;

    std::vector<int> usable;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Tensor& spec = data[i].spec;
        if (spec.shape.size() != 2 || spec.shape[0] != model.config.input_bands) {
            throw std::invalid_argument("training spectrogram has the wrong band count");
        }
        if (data[i].label < 0 || data[i].label >= kNumClasses) {
            throw std::invalid_argument("label out of range");
        }
        if (spec.shape[1] < d) {
            history.warnings.push_back("recording " + std::to_string(i) +
                                       " shorter than the model window; excluded");
            continue;
        }
        usable.push_back(static_cast<int>(i));
    }

    std::array<int, kNumClasses> per_class{};
    for (int i : usable) per_class[std::size_t(data[std::size_t(i)].label)]++;
    for (int c = 0; c < kNumClasses; ++c) {
        if (per_class[c] == 0) {
            throw std::invalid_argument(std::string("no usable recordings for class ") +
                                        class_name(static_cast<AudioClass>(c)));
        }
    }

    std::mt19937_64 rng(cfg.seed);
    CnnModel m_state = zero_like(model);
    CnnModel v_state = zero_like(model);
    long step_count = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(usable.begin(), usable.end(), rng);
        double epoch_loss = 0.0;
        int batch_count = 0;

        for (std::size_t pos = 0; pos < usable.size(); pos += std::size_t(cfg.batch)) {
            const std::size_t end = std::min(usable.size(), pos + std::size_t(cfg.batch));
            const int batch_n = static_cast<int>(end - pos);
            CnnModel grad = zero_like(model);
            double batch_loss = 0.0;

            for (std::size_t s = pos; s < end; ++s) {
                const TrainSample& sample = data[std::size_t(usable[s])];
                const int frames = sample.spec.shape[1];
                std::uniform_int_distribution<int> start_dist(0, frames - d);
                const int start = start_dist(rng);

                Tensor patch({model.config.input_bands, d});
                for (int band = 0; band < model.config.input_bands; ++band) {
                    const double* src =
                        sample.spec.v.data() + std::size_t(band) * frames + start;
                    std::copy(src, src + d, patch.v.begin() + std::size_t(band) * d);
                }

                Activations act;
                DropoutPolicy policy;
                policy.mode = DropoutPolicy::Mode::sample;
                policy.rng = &rng;
                run_forward(model, patch, policy, &act);
                batch_loss += -std::log(std::max(act.probs[std::size_t(sample.label)], 1e-300));
                backward(model, act, sample.label, grad);
            }

            // Mean gradient over the batch, then one Adam step.
            ++step_count;
            const double bc1 = 1.0 - std::pow(cfg.beta1, double(step_count));
            const double bc2 = 1.0 - std::pow(cfg.beta2, double(step_count));
            auto* gm = &m_state;
            auto* gv = &v_state;
            std::vector<Tensor*> model_t, grad_t, m_t, v_t;
            model.for_each_tensor([&](Tensor& t) { model_t.push_back(&t); });
            grad.for_each_tensor([&](Tensor& t) { grad_t.push_back(&t); });
            gm->for_each_tensor([&](Tensor& t) { m_t.push_back(&t); });
            gv->for_each_tensor([&](Tensor& t) { v_t.push_back(&t); });
            for (std::size_t ti = 0; ti < model_t.size(); ++ti) {
                auto& p = model_t[ti]->v;
                auto& g = grad_t[ti]->v;
                auto& m = m_t[ti]->v;
                auto& v = v_t[ti]->v;
                for (std::size_t j = 0; j < p.size(); ++j) {
                    const double gj = g[j] / batch_n;
                    m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gj;
                    v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gj * gj;
                    p[j] -= cfg.lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg.eps);
                }
            }

            epoch_loss += batch_loss / batch_n;
            ++batch_count;
        }
        history.epoch_loss.push_back(epoch_loss / std::max(1, batch_count));
    }
    return history;
}

double gradient_check(const CnnModel& model, const Tensor& input, int label,
                      const GradCheckOptions& opts) {
    CnnModel work = model;
    std::vector<std::vector<char>> masks;
    DropoutPolicy policy;
    if (opts.fixed_dropout && model.config.dropout_p > 0.0) {
        masks = make_dropout_masks(model, opts.dropout_seed);
        policy.mode = DropoutPolicy::Mode::fixed;
        policy.masks = &masks;
    }

    auto loss_of = [&](const CnnModel& m) {
        const Prediction p = run_forward(m, input, policy, nullptr);
        return -std::log(std::max(p[std::size_t(label)], 1e-300));
    };

    Activations act;
    run_forward(work, input, policy, &act);
    CnnModel analytic = zero_like(work);
    backward(work, act, label, analytic);

    std::vector<Tensor*> params, grads;
    work.for_each_tensor([&](Tensor& t) { params.push_back(&t); });
    analytic.for_each_tensor([&](Tensor& t) { grads.push_back(&t); });

    double max_rel = 0.0;
    const double h = opts.step;
    for (std::size_t ti = 0; ti < params.size(); ++ti) {
        auto& p = params[ti]->v;
        const auto& g = grads[ti]->v;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double orig = p[j];
            p[j] = orig + h;
            const double lp = loss_of(work);
            p[j] = orig - h;
            const double lm = loss_of(work);
            p[j] = orig;
            const double numeric = (lp - lm) / (2.0 * h);
            const double rel = std::abs(g[j] - numeric) /
                               std::max({std::abs(g[j]), std::abs(numeric), 1.0});
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

std::vector<Prediction> sliding_window_predict(const CnnModel& model, const Tensor& full) {
    if (full.shape.size() != 2 || full.shape[0] != model.config.input_bands) {
        throw std::invalid_argument("spectrogram band count does not match the model");
    }
    const int frames = full.shape[1];
    const int d = model.config.window_frames;
    if (frames < d) {
        throw std::invalid_argument(
            "recording shorter than the model window; pad the input or use a "
            "smaller-scale model");
    }
    std::vector<Prediction> out;
    out.reserve(std::size_t(frames - d + 1));
    Tensor patch({model.config.input_bands, d});
    for (int start = 0; start + d <= frames; ++start) {
        for (int band = 0; band < model.config.input_bands; ++band) {
            const double* src = full.v.data() + std::size_t(band) * frames + start;
            std::copy(src, src + d, patch.v.begin() + std::size_t(band) * d);
        }
        out.push_back(run_forward(model, patch, {}, nullptr));
    }
    return out;
}

std::vector<Prediction> sliding_window_predict(const CnnModel& model,
                                               const mel::Spectrogram& spec) {
    return sliding_window_predict(model, to_input_tensor(spec, model.config.log_compress));
}

Prediction classify_recording(const std::vector<const CnnModel*>& models, const Tensor& full) {
    if (models.empty()) throw std::invalid_argument("no models supplied");
    Prediction total{};
    int applicable = 0;
    for (const CnnModel* m : models) {
        if (full.shape[1] < m->config.window_frames) continue;
        const std::vector<Prediction> preds = sliding_window_predict(*m, full);
        Prediction mean{};
        for (const Prediction& p : preds) {
            for (int c = 0; c < kNumClasses; ++c) mean[c] += p[c];
        }
        for (int c = 0; c < kNumClasses; ++c) total[c] += mean[c] / double(preds.size());
        ++applicable;
    }
    if (applicable == 0) {
        throw std::invalid_argument("recording shorter than every model window");
    }
    for (double& x : total) x /= applicable;
    return total;
}

Prediction classify_recording(const std::vector<const CnnModel*>& models,
                              const mel::Spectrogram& spec) {
    if (models.empty()) throw std::invalid_argument("no models supplied");
    return classify_recording(models,
                              to_input_tensor(spec, models.front()->config.log_compress));
}

Tensor to_input_tensor(const mel::Spectrogram& spec, bool log_compress) {
    Tensor t({spec.n_mels, spec.n_frames});
    for (int band = 0; band < spec.n_mels; ++band) {
        for (int frame = 0; frame < spec.n_frames; ++frame) {
            const double v = spec.at(frame, band);
            t.v[std::size_t(band) * spec.n_frames + frame] = log_compress ? std::log1p(v) : v;
        }
    }
    return t;
}

void save_model(const CnnModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path.string());
    out.write("S4CN", 4);
    write_u32(out, 1);  // format version

    std::ostringstream header;
    header << "input_bands=" << model.config.input_bands << "\n"
           << "window_frames=" << model.config.window_frames << "\n"
           << "blocks=" << model.config.blocks << "\n"
           << "layers_per_block=" << model.config.layers_per_block << "\n"
           << "kernels=" << model.config.kernels << "\n"
           << "dropout_p=" << model.config.dropout_p << "\n"
           << "log_compress=" << (model.config.log_compress ? 1 : 0) << "\n";
    const std::string head = header.str();
    write_u32(out, static_cast<std::uint32_t>(head.size()));
    out.write(head.data(), static_cast<std::streamsize>(head.size()));

    std::uint32_t tensor_count = 0;
    model.for_each_tensor([&](const Tensor&) { ++tensor_count; });
    write_u32(out, tensor_count);
    int conv_idx = 0;
    for (const auto& c : model.convs) {
        write_tensor(out, "conv" + std::to_string(conv_idx) + ".w", c.w);
        write_tensor(out, "conv" + std::to_string(conv_idx) + ".b", c.b);
        ++conv_idx;
    }
    write_tensor(out, "dense.w", model.dense.w);
    write_tensor(out, "dense.b", model.dense.b);
    if (!out) throw std::runtime_error("failed writing model file: " + path.string());
}

CnnModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "S4CN", 4) != 0) {
        throw std::runtime_error("not a model file: " + path.string());
    }
    const std::uint32_t version = read_u32(in);
    if (version != 1) {
        throw std::runtime_error("unsupported model format version " + std::to_string(version));
    }

    const std::uint32_t head_len = read_u32(in);
    std::string head(head_len, '\0');
    in.read(head.data(), head_len);
    if (!in) throw std::runtime_error("truncated model file");

    ModelConfig cfg;
    std::istringstream hs(head);
    std::string line;
    std::map<std::string, std::string> kv;
    while (std::getline(hs, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto geti = [&](const std::string& key, int& out_v) {
        auto it = kv.find(key);
        if (it == kv.end()) throw std::runtime_error("model header missing key: " + key);
        out_v = std::stoi(it->second);
    };
    geti("input_bands", cfg.input_bands);
    geti("window_frames", cfg.window_frames);
    geti("blocks", cfg.blocks);
    geti("layers_per_block", cfg.layers_per_block);
    geti("kernels", cfg.kernels);
    cfg.dropout_p = std::stod(kv.at("dropout_p"));
    cfg.log_compress = kv.at("log_compress") == "1";

    CnnModel model = build_model(cfg, 0, /*enforce_grid=*/false);
    const std::uint32_t tensor_count = read_u32(in);
    std::uint32_t expected = 0;
    model.for_each_tensor([&](const Tensor&) { ++expected; });
    if (tensor_count != expected) throw std::runtime_error("model tensor count mismatch");

    std::vector<Tensor*> slots;
    model.for_each_tensor([&](Tensor& t) { slots.push_back(&t); });
    for (Tensor* slot : slots) {
        const std::uint32_t name_len = read_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const std::uint32_t ndim = read_u32(in);
        std::vector<int> dims(ndim);
        for (auto& d : dims) d = static_cast<int>(read_u32(in));
        if (dims != slot->shape) throw std::runtime_error("tensor shape mismatch: " + name);
        in.read(reinterpret_cast<char*>(slot->v.data()),
                static_cast<std::streamsize>(slot->v.size() * sizeof(double)));
        if (!in) throw std::runtime_error("truncated tensor data: " + name);
    }
    return model;
}

}  // namespace s4c::cnn
