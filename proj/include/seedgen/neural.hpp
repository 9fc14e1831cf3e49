#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "seedgen/matrix.hpp"
#include "seedgen/rng.hpp"

namespace seedgen {

struct TrainConfig {
    double learning_rate = 2e-3;
    std::size_t batch_size = 4;
    std::size_t bptt_window = 64;
    std::size_t epochs = 100;
    double gradient_clip_norm = 5.0;
    std::uint64_t rng_seed = 1;
};

// One LSTM layer; gate rows stacked [input; forget; output; candidate].
struct LstmLayer {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    Matrix wx;  // 4H x D
    Matrix wh;  // 4H x H
    Matrix b;   // 1 x 4H

    LstmLayer() = default;
    LstmLayer(std::size_t input, std::size_t hidden);
    void init_params(Rng& rng);
};

// Hidden/cell state per layer.
struct RnnState {
    std::vector<std::vector<double>> h;
    std::vector<std::vector<double>> c;
};

struct NamedParam {
    std::string name;
    Matrix* tensor;
};

// Two-layer LSTM language model with tied input/hidden width.
struct RnnLM {
    std::size_t vocab_size = 0;
    std::size_t hidden_dim = 0;
    Matrix embedding;  // V x H
    std::vector<LstmLayer> layers;  // exactly 2
    Matrix proj;    // V x H
    Matrix proj_b;  // 1 x V
    double temperature = 1.0;

    RnnLM() = default;
    RnnLM(std::size_t vocab, std::size_t hidden, std::uint64_t init_seed = 1);
    RnnState init_state() const;
    std::vector<NamedParam> params();
    std::vector<NamedParam> params() const;
};

// Encoder-decoder over separate vocabularies, plain final-state handoff.
struct Seq2Seq {
    std::size_t source_vocab_size = 0;
    std::size_t target_vocab_size = 0;
    std::size_t hidden_dim = 0;
    double encoder_dropout_rate = 0.5;
    double decoder_dropout_rate = 0.0;
    Matrix enc_embedding;  // Vs x H
    Matrix dec_embedding;  // Vt x H
    std::vector<LstmLayer> encoder;  // 2 layers
    std::vector<LstmLayer> decoder;  // 2 layers
    Matrix proj;    // Vt x H
    Matrix proj_b;  // 1 x Vt

    Seq2Seq() = default;
    Seq2Seq(std::size_t source_vocab, std::size_t target_vocab, std::size_t hidden,
            std::uint64_t init_seed = 1);
    std::vector<NamedParam> params();
    std::vector<NamedParam> params() const;
};

struct LmForward {
    std::vector<std::vector<double>> dists;  // one softmax per input position
    RnnState final_state;
};

// Forward pass; distributions are plain softmax (temperature applies at
// sampling time).
LmForward lm_forward(const RnnLM& model, const std::vector<int>& token_ids,
                     const RnnState& initial);

// Mean cross-entropy (nats/token) over sequences; fills grads (aligned with
// model.params()) when non-null.
double lm_loss_and_grads(const RnnLM& model, const std::vector<std::vector<int>>& sequences,
                         std::vector<Matrix>* grads);

// Trains with truncated BPTT, Adam and gradient-norm clipping. Returns the
// per-epoch mean cross-entropy.
std::vector<double> lm_train(RnnLM& model, const std::vector<std::vector<int>>& sequences,
                             const TrainConfig& cfg);

// Teacher-forced loss over (source, target-with-sentinels) pairs. Encoder
// dropout is applied only when dropout_rng is non-null.
double seq2seq_loss_and_grads(const Seq2Seq& model,
                              const std::vector<std::pair<std::vector<int>, std::vector<int>>>& pairs,
                              std::vector<Matrix>* grads, Rng* dropout_rng);

std::vector<double> seq2seq_train(Seq2Seq& model,
                                  const std::vector<std::pair<std::vector<int>, std::vector<int>>>& pairs,
                                  const TrainConfig& cfg);

// Greedy decode from start_id until end_id or max_len tokens. Returned
// sequence excludes the sentinels. Deterministic (no dropout).
std::vector<int> seq2seq_greedy_decode(const Seq2Seq& model, const std::vector<int>& source,
                                       int start_id, int end_id, std::size_t max_len);

// Per-step decoder distribution access for the language model.
struct LmSampler {
    const RnnLM* model;
    RnnState state;

    explicit LmSampler(const RnnLM& m) : model(&m), state(m.init_state()) {}
    // feeds one token, returns the next-token distribution
    std::vector<double> step(int token_id);
};

// Inverse-CDF draw after rescaling the distribution by 1/temperature in log
// space. Consumes exactly one rng value.
int sample_categorical(const std::vector<double>& dist, double temperature, Rng& rng);

int argmax_index(const std::vector<double>& dist);

// Rescales so the global gradient norm does not exceed max_norm.
void clip_gradients(std::vector<Matrix>& grads, double max_norm);

// Max relative error between `analytic` and central finite differences of
// `loss` (step 1e-4), over every parameter entry.
double gradient_check(const std::vector<NamedParam>& params,
                      const std::vector<Matrix>& analytic,
                      const std::function<double()>& loss);

// Checkpoints: "SSNN" magic, u16 version, u8 kind, then self-describing
// named tensors, little-endian f64 payloads.
std::string save_checkpoint(const RnnLM& model);
std::string save_checkpoint(const Seq2Seq& model);
void load_checkpoint(RnnLM& model, const std::string& bytes);
void load_checkpoint(Seq2Seq& model, const std::string& bytes);

}  // namespace seedgen
