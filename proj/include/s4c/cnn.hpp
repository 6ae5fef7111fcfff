#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "s4c/mel.hpp"

namespace s4c::cnn {

enum class AudioClass : int { cough = 0, breath = 1, voice = 2 };
constexpr int kNumClasses = 3;
const char* class_name(AudioClass c);
std::optional<AudioClass> class_from_name(const std::string& name);

// Probability vector over {cough, breath, voice}; sums to 1.
using Prediction = std::array<double, kNumClasses>;

struct ModelConfig {
    int input_bands = 128;     // frequency axis of the input patch
    int window_frames = 128;   // time axis d of the input patch
    int blocks = 3;            // b: conv blocks, each ending in 2x2 max pool + dropout
    int layers_per_block = 1;  // l: conv layers per block
    int kernels = 64;          // k: 3x3 kernels per conv layer
    double dropout_p = 0.5;
    bool log_compress = true;  // log1p on mel energies at input preparation
};

// Checks the tuning-grid bounds: d in [128,1024], l in [1,3], k in [64,128],
// b in [3, log2(d)], dropout in [0,1), and both axes divisible by 2^b.
// Throws std::invalid_argument on violation.
void validate_grid_config(const ModelConfig& cfg);

// Structural feasibility only (axes divisible by 2^b, positive sizes); used
// for reduced test models that sit outside the tuning grid.
void validate_structure(const ModelConfig& cfg);

struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> dims);
    std::size_t size() const { return v.size(); }
};

struct ConvLayer {
    Tensor w;  // [out][in][3][3]
    Tensor b;  // [out]
};

struct DenseLayer {
    Tensor w;  // [classes][features]
    Tensor b;  // [classes]
};

struct CnnModel {
    ModelConfig config;
    std::vector<ConvLayer> convs;  // blocks * layers_per_block entries
    DenseLayer dense;

    std::size_t parameter_count() const;

    template <typename Fn>
    void for_each_tensor(Fn&& fn) {
        for (auto& c : convs) {
            fn(c.w);
            fn(c.b);
        }
        fn(dense.w);
        fn(dense.b);
    }
    template <typename Fn>
    void for_each_tensor(Fn&& fn) const {
        for (const auto& c : convs) {
            fn(c.w);
            fn(c.b);
        }
        fn(dense.w);
        fn(dense.b);
    }
};

// Analytic parameter total for a config: 9k+k for the first conv, 9k^2+k for
// each of the remaining b*l-1, and the flattened dense head.
std::size_t closed_form_parameter_count(const ModelConfig& cfg);

// He-initialized model; identical seeds give identical weights. enforce_grid
// selects between the tuning-grid bounds and structural checks only.
CnnModel build_model(const ModelConfig& cfg, std::uint64_t seed, bool enforce_grid = true);

// Dropout behaviour for a forward pass.
struct DropoutPolicy {
    enum class Mode { off, sample, fixed } mode = Mode::off;
    std::mt19937_64* rng = nullptr;                       // for Mode::sample
    const std::vector<std::vector<char>>* masks = nullptr;  // for Mode::fixed, one per block
};

// Conv(ReLU, same padding) x l per block -> 2x2 max pool -> dropout, then
// flatten -> dense -> softmax. Input shape must be [input_bands][window_frames].
Prediction forward(const CnnModel& model, const Tensor& input,
                   const DropoutPolicy& dropout = {});

// Keep-masks of the right shapes for DropoutPolicy::Mode::fixed.
std::vector<std::vector<char>> make_dropout_masks(const CnnModel& model, std::uint64_t seed);

struct TrainConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch = 32;
    int epochs = 10;
    std::uint64_t seed = 0;
};

struct TrainSample {
    Tensor spec;  // [input_bands][frames], frames >= window_frames
    int label = 0;
};

struct TrainHistory {
    std::vector<double> epoch_loss;
    std::vector<std::string> warnings;  // excluded recordings etc.
};

// Cross-entropy training with Adam. Each epoch visits every usable recording
// once, drawing one random window per recording per step. Recordings shorter
// than the window are excluded with a warning; an empty class is an error.
TrainHistory train(CnnModel& model, const std::vector<TrainSample>& data,
                   const TrainConfig& cfg);

struct GradCheckOptions {
    double step = 1e-4;
    bool fixed_dropout = false;       // exercise dropout with a frozen mask
    std::uint64_t dropout_seed = 0;
};

// Max relative error between analytic and central finite-difference gradients
// over every parameter; relative to max(|analytic|, |numeric|, 1).
double gradient_check(const CnnModel& model, const Tensor& input, int label,
                      const GradCheckOptions& opts = {});

// One prediction per window start frame: exactly frames - d + 1 of them.
std::vector<Prediction> sliding_window_predict(const CnnModel& model, const Tensor& full);
std::vector<Prediction> sliding_window_predict(const CnnModel& model,
                                               const mel::Spectrogram& spec);

// Soft ensemble: mean over each applicable model's mean window prediction.
// A model applies when the recording is at least one window long.
Prediction classify_recording(const std::vector<const CnnModel*>& models,
                              const mel::Spectrogram& spec);
Prediction classify_recording(const std::vector<const CnnModel*>& models, const Tensor& full);

// Spectrogram rows become the time axis of a [bands][frames] input tensor,
// optionally log1p-compressed.
Tensor to_input_tensor(const mel::Spectrogram& spec, bool log_compress);

// Versioned little-endian model container: magic, text config header, then
// shape-tagged float64 tensors.
void save_model(const CnnModel& model, const std::filesystem::path& path);
CnnModel load_model(const std::filesystem::path& path);

}  // namespace s4c::cnn
