#include "seedgen/neural.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "seedgen/errors.hpp"

namespace seedgen {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kInitRange = 0.08;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

struct StepCache {
    std::vector<double> x;       // layer input (post-dropout if any)
    std::vector<double> mask;    // dropout mask, empty when none
    std::vector<double> h_prev, c_prev;
    std::vector<double> i, f, o, g, c, tanh_c, h;
};

// z = Wx x + Wh h_prev + b, gates in row blocks [i f o g]
void lstm_step_forward(const LstmLayer& L, StepCache& cc) {
    const std::size_t H = L.hidden_dim;
    const std::size_t D = L.input_dim;
    std::vector<double> z(4 * H);
    for (std::size_t r = 0; r < 4 * H; ++r) {
        double acc = L.b[r];
        const double* wx = L.wx.data() + r * D;
        for (std::size_t k = 0; k < D; ++k) acc += wx[k] * cc.x[k];
        const double* wh = L.wh.data() + r * H;
        for (std::size_t k = 0; k < H; ++k) acc += wh[k] * cc.h_prev[k];
        z[r] = acc;
    }
    cc.i.resize(H);
    cc.f.resize(H);
    cc.o.resize(H);
    cc.g.resize(H);
    cc.c.resize(H);
    cc.tanh_c.resize(H);
    cc.h.resize(H);
    for (std::size_t k = 0; k < H; ++k) {
        cc.i[k] = sigmoid(z[k]);
        cc.f[k] = sigmoid(z[H + k]);
        cc.o[k] = sigmoid(z[2 * H + k]);
        cc.g[k] = std::tanh(z[3 * H + k]);
        cc.c[k] = cc.f[k] * cc.c_prev[k] + cc.i[k] * cc.g[k];
        cc.tanh_c[k] = std::tanh(cc.c[k]);
        cc.h[k] = cc.o[k] * cc.tanh_c[k];
    }
}

// Given dh, dc flowing into this step, accumulates parameter grads and
// returns dx, dh_prev, dc_prev via out-params.
void lstm_step_backward(const LstmLayer& L, const StepCache& cc,
                        const std::vector<double>& dh, std::vector<double>& dc,
                        Matrix& gwx, Matrix& gwh, Matrix& gb,
                        std::vector<double>& dx, std::vector<double>& dh_prev,
                        std::vector<double>& dc_prev) {
    const std::size_t H = L.hidden_dim;
    const std::size_t D = L.input_dim;
    std::vector<double> dz(4 * H);
    dc_prev.assign(H, 0.0);
    for (std::size_t k = 0; k < H; ++k) {
        double do_ = dh[k] * cc.tanh_c[k];
        double dck = dc[k] + dh[k] * cc.o[k] * (1.0 - cc.tanh_c[k] * cc.tanh_c[k]);
        double di = dck * cc.g[k];
        double dg = dck * cc.i[k];
        double df = dck * cc.c_prev[k];
        dc_prev[k] = dck * cc.f[k];
        dz[k] = di * cc.i[k] * (1.0 - cc.i[k]);
        dz[H + k] = df * cc.f[k] * (1.0 - cc.f[k]);
        dz[2 * H + k] = do_ * cc.o[k] * (1.0 - cc.o[k]);
        dz[3 * H + k] = dg * (1.0 - cc.g[k] * cc.g[k]);
    }
    dx.assign(D, 0.0);
    dh_prev.assign(H, 0.0);
    for (std::size_t r = 0; r < 4 * H; ++r) {
        const double d = dz[r];
        if (d == 0.0) continue;
        double* gx = gwx.data() + r * D;
        const double* wx = L.wx.data() + r * D;
        for (std::size_t k = 0; k < D; ++k) {
            gx[k] += d * cc.x[k];
            dx[k] += d * wx[k];
        }
        double* gh = gwh.data() + r * H;
        const double* wh = L.wh.data() + r * H;
        for (std::size_t k = 0; k < H; ++k) {
            gh[k] += d * cc.h_prev[k];
            dh_prev[k] += d * wh[k];
        }
        gb[r] += d;
    }
}

std::vector<Matrix> make_grads(const std::vector<NamedParam>& params) {
    std::vector<Matrix> grads;
    grads.reserve(params.size());
    for (const auto& p : params) grads.emplace_back(p.tensor->rows(), p.tensor->cols());
    return grads;
}



struct AdamState {
    std::vector<Matrix> m, v;
    std::size_t t = 0;

    explicit AdamState(const std::vector<NamedParam>& params)
        : m(make_grads(params)), v(make_grads(params)) {}

    void step(std::vector<NamedParam>& params, const std::vector<Matrix>& grads,
              double lr) {
        ++t;
        double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t));
        double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));
        for (std::size_t p = 0; p < params.size(); ++p) {
            Matrix& w = *params[p].tensor;
            const Matrix& g = grads[p];
            for (std::size_t i = 0; i < w.size(); ++i) {
                m[p][i] = kAdamBeta1 * m[p][i] + (1.0 - kAdamBeta1) * g[i];
                v[p][i] = kAdamBeta2 * v[p][i] + (1.0 - kAdamBeta2) * g[i] * g[i];
                double mhat = m[p][i] / bc1;
                double vhat = v[p][i] / bc2;
                w[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
            }
        }
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// model construction
// ---------------------------------------------------------------------------

LstmLayer::LstmLayer(std::size_t input, std::size_t hidden)
    : input_dim(input), hidden_dim(hidden),
      wx(4 * hidden, input), wh(4 * hidden, hidden), b(1, 4 * hidden) {}

void LstmLayer::init_params(Rng& rng) {
    for (std::size_t i = 0; i < wx.size(); ++i) wx[i] = rng.uniform(-kInitRange, kInitRange);
    for (std::size_t i = 0; i < wh.size(); ++i) wh[i] = rng.uniform(-kInitRange, kInitRange);
    b.fill(0.0);
    for (std::size_t k = 0; k < hidden_dim; ++k) b[hidden_dim + k] = 1.0;  // forget gate
}

RnnLM::RnnLM(std::size_t vocab, std::size_t hidden, std::uint64_t init_seed)
    : vocab_size(vocab), hidden_dim(hidden),
      embedding(vocab, hidden), proj(vocab, hidden), proj_b(1, vocab) {
    layers.emplace_back(hidden, hidden);
    layers.emplace_back(hidden, hidden);
    Rng rng(init_seed);
    for (std::size_t i = 0; i < embedding.size(); ++i)
        embedding[i] = rng.uniform(-kInitRange, kInitRange);
    for (auto& l : layers) l.init_params(rng);
    for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = rng.uniform(-kInitRange, kInitRange);
}

RnnState RnnLM::init_state() const {
    RnnState s;
    s.h.assign(layers.size(), std::vector<double>(hidden_dim, 0.0));
    s.c.assign(layers.size(), std::vector<double>(hidden_dim, 0.0));
    return s;
}

std::vector<NamedParam> RnnLM::params() {
    std::vector<NamedParam> p;
    p.push_back({"embedding", &embedding});
    for (std::size_t l = 0; l < layers.size(); ++l) {
        std::string pre = "lstm" + std::to_string(l) + ".";
        p.push_back({pre + "wx", &layers[l].wx});
        p.push_back({pre + "wh", &layers[l].wh});
        p.push_back({pre + "b", &layers[l].b});
    }
    p.push_back({"proj", &proj});
    p.push_back({"proj_b", &proj_b});
    return p;
}

std::vector<NamedParam> RnnLM::params() const {
    return const_cast<RnnLM*>(this)->params();
}

Seq2Seq::Seq2Seq(std::size_t source_vocab, std::size_t target_vocab, std::size_t hidden,
                 std::uint64_t init_seed)
    : source_vocab_size(source_vocab), target_vocab_size(target_vocab), hidden_dim(hidden),
      enc_embedding(source_vocab, hidden), dec_embedding(target_vocab, hidden),
      proj(target_vocab, hidden), proj_b(1, target_vocab) {
    encoder.emplace_back(hidden, hidden);
    encoder.emplace_back(hidden, hidden);
    decoder.emplace_back(hidden, hidden);
    decoder.emplace_back(hidden, hidden);
    Rng rng(init_seed);
    for (std::size_t i = 0; i < enc_embedding.size(); ++i)
        enc_embedding[i] = rng.uniform(-kInitRange, kInitRange);
    for (std::size_t i = 0; i < dec_embedding.size(); ++i)
        dec_embedding[i] = rng.uniform(-kInitRange, kInitRange);
    for (auto& l : encoder) l.init_params(rng);
    for (auto& l : decoder) l.init_params(rng);
    for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = rng.uniform(-kInitRange, kInitRange);
}

std::vector<NamedParam> Seq2Seq::params() {
    std::vector<NamedParam> p;
    p.push_back({"enc_embedding", &enc_embedding});
    p.push_back({"dec_embedding", &dec_embedding});
    for (std::size_t l = 0; l < encoder.size(); ++l) {
        std::string pre = "enc" + std::to_string(l) + ".";
        p.push_back({pre + "wx", &encoder[l].wx});
        p.push_back({pre + "wh", &encoder[l].wh});
        p.push_back({pre + "b", &encoder[l].b});
    }
    for (std::size_t l = 0; l < decoder.size(); ++l) {
        std::string pre = "dec" + std::to_string(l) + ".";
        p.push_back({pre + "wx", &decoder[l].wx});
        p.push_back({pre + "wh", &decoder[l].wh});
        p.push_back({pre + "b", &decoder[l].b});
    }
    p.push_back({"proj", &proj});
    p.push_back({"proj_b", &proj_b});
    return p;
}

std::vector<NamedParam> Seq2Seq::params() const {
    return const_cast<Seq2Seq*>(this)->params();
}

// ---------------------------------------------------------------------------
// forward / backward
// ---------------------------------------------------------------------------

namespace {

// Runs an LSTM stack over embedded inputs, filling caches[layer][t].
// dropout_rate/rng apply inverted dropout to each layer's input.
void stack_forward(const std::vector<LstmLayer>& layers, const Matrix& embedding,
                   const std::vector<int>& tokens, RnnState& state,
                   std::vector<std::vector<StepCache>>& caches,
                   double dropout_rate, Rng* dropout_rng) {
    const std::size_t L = layers.size();
    const std::size_t T = tokens.size();
    caches.assign(L, std::vector<StepCache>(T));
    const double keep = 1.0 - dropout_rate;
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<double> x(embedding.cols());
        const double* row = embedding.data() + static_cast<std::size_t>(tokens[t]) * embedding.cols();
        std::copy(row, row + embedding.cols(), x.begin());
        for (std::size_t l = 0; l < L; ++l) {
            StepCache& cc = caches[l][t];
            cc.x = std::move(x);
            // dropout on the non-recurrent connections between stacked layers
            if (dropout_rng && dropout_rate > 0.0 && l > 0) {
                cc.mask.resize(cc.x.size());
                for (std::size_t k = 0; k < cc.x.size(); ++k) {
                    cc.mask[k] = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
                    cc.x[k] *= cc.mask[k];
                }
            }
            cc.h_prev = state.h[l];
            cc.c_prev = state.c[l];
            lstm_step_forward(layers[l], cc);
            state.h[l] = cc.h;
            state.c[l] = cc.c;
            x = cc.h;  // input for the next layer
        }
    }
}

struct StackGrads {
    // one (wx, wh, b) triple per layer, aliases into the caller's grad vector
    std::vector<Matrix*> wx, wh, b;
};

// Backward through a full stack pass. dh_top[t] is the loss gradient on the
// top layer's output at step t. d_init_h/d_init_c receive gradients wrt the
// initial state; demb accumulates embedding-row gradients.
void stack_backward(const std::vector<LstmLayer>& layers,
                    const std::vector<std::vector<StepCache>>& caches,
                    const std::vector<int>& tokens,
                    std::vector<std::vector<double>>& dh_top,
                    StackGrads& g, Matrix& demb,
                    std::vector<std::vector<double>>* d_final_h,
                    std::vector<std::vector<double>>* d_final_c,
                    std::vector<std::vector<double>>* d_init_h,
                    std::vector<std::vector<double>>* d_init_c) {
    const std::size_t L = layers.size();
    const std::size_t T = caches.empty() ? 0 : caches[0].size();
    const std::size_t H = layers[0].hidden_dim;
    std::vector<std::vector<double>> dh_carry(L, std::vector<double>(H, 0.0));
    std::vector<std::vector<double>> dc_carry(L, std::vector<double>(H, 0.0));
    if (d_final_h) dh_carry = *d_final_h;
    if (d_final_c) dc_carry = *d_final_c;

    std::vector<double> dx, dh_prev, dc_prev;
    for (std::size_t ti = T; ti-- > 0;) {
        std::vector<double> from_above = dh_top[ti];
        for (std::size_t l = L; l-- > 0;) {
            std::vector<double> dh = dh_carry[l];
            for (std::size_t k = 0; k < H; ++k) dh[k] += from_above[k];
            lstm_step_backward(layers[l], caches[l][ti], dh, dc_carry[l],
                               *g.wx[l], *g.wh[l], *g.b[l], dx, dh_prev, dc_prev);
            // dropout backward on the layer input
            const StepCache& cc = caches[l][ti];
            if (!cc.mask.empty())
                for (std::size_t k = 0; k < dx.size(); ++k) dx[k] *= cc.mask[k];
            dh_carry[l] = dh_prev;
            dc_carry[l] = dc_prev;
            from_above = dx;
        }
        double* erow = demb.data() + static_cast<std::size_t>(tokens[ti]) * demb.cols();
        for (std::size_t k = 0; k < from_above.size(); ++k) erow[k] += from_above[k];
    }
    if (d_init_h) *d_init_h = dh_carry;
    if (d_init_c) *d_init_c = dc_carry;
}

std::vector<double> project_softmax(const Matrix& proj, const Matrix& proj_b,
                                    const std::vector<double>& h) {
    std::vector<double> logits(proj.rows());
    for (std::size_t r = 0; r < proj.rows(); ++r) {
        double acc = proj_b[r];
        const double* w = proj.data() + r * proj.cols();
        for (std::size_t k = 0; k < proj.cols(); ++k) acc += w[k] * h[k];
        logits[r] = acc;
    }
    return softmax(logits);
}

void check_token_range(const std::vector<int>& tokens, std::size_t vocab) {
    for (int t : tokens)
        if (t < 0 || static_cast<std::size_t>(t) >= vocab)
            throw ParameterError("token id " + std::to_string(t) + " out of range (vocab " +
                                 std::to_string(vocab) + ")");
}

}  // namespace

LmForward lm_forward(const RnnLM& model, const std::vector<int>& token_ids,
                     const RnnState& initial) {
    check_token_range(token_ids, model.vocab_size);
    LmForward out;
    out.final_state = initial;
    std::vector<std::vector<StepCache>> caches;
    stack_forward(model.layers, model.embedding, token_ids, out.final_state, caches, 0.0, nullptr);
    out.dists.reserve(token_ids.size());
    for (std::size_t t = 0; t < token_ids.size(); ++t)
        out.dists.push_back(project_softmax(model.proj, model.proj_b, caches.back()[t].h));
    return out;
}

std::vector<double> LmSampler::step(int token_id) {
    check_token_range({token_id}, model->vocab_size);
    std::vector<std::vector<StepCache>> caches;
    stack_forward(model->layers, model->embedding, {token_id}, state, caches, 0.0, nullptr);
    return project_softmax(model->proj, model->proj_b, caches.back()[0].h);
}

namespace {

// Loss and gradients over one window of (inputs -> targets), starting from
// `state` which is advanced to the window's final state. Returns summed CE.
double lm_window(const RnnLM& model, const std::vector<int>& inputs,
                 const std::vector<int>& targets, RnnState& state,
                 std::vector<Matrix>* grads) {
    std::vector<std::vector<StepCache>> caches;
    RnnState in_state = state;
    stack_forward(model.layers, model.embedding, inputs, state, caches, 0.0, nullptr);

    const std::size_t T = inputs.size();
    double loss = 0.0;
    std::vector<std::vector<double>> dh_top(T, std::vector<double>(model.hidden_dim, 0.0));
    Matrix* gproj = nullptr;
    Matrix* gproj_b = nullptr;
    StackGrads sg;
    Matrix* demb = nullptr;
    if (grads) {
        demb = &(*grads)[0];
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            sg.wx.push_back(&(*grads)[1 + 3 * l]);
            sg.wh.push_back(&(*grads)[2 + 3 * l]);
            sg.b.push_back(&(*grads)[3 + 3 * l]);
        }
        gproj = &(*grads)[1 + 3 * model.layers.size()];
        gproj_b = &(*grads)[2 + 3 * model.layers.size()];
    }
    for (std::size_t t = 0; t < T; ++t) {
        const auto& h = caches.back()[t].h;
        auto dist = project_softmax(model.proj, model.proj_b, h);
        double p = std::max(dist[static_cast<std::size_t>(targets[t])], 1e-300);
        loss += -std::log(p);
        if (grads) {
            std::vector<double> dlogits = dist;
            dlogits[static_cast<std::size_t>(targets[t])] -= 1.0;
            for (std::size_t r = 0; r < model.proj.rows(); ++r) {
                const double d = dlogits[r];
                (*gproj_b)[r] += d;
                double* gp = gproj->data() + r * model.proj.cols();
                const double* w = model.proj.data() + r * model.proj.cols();
                for (std::size_t k = 0; k < model.proj.cols(); ++k) {
                    gp[k] += d * h[k];
                    dh_top[t][k] += d * w[k];
                }
            }
        }
    }
    if (grads)
        stack_backward(model.layers, caches, inputs, dh_top, sg, *demb,
                       nullptr, nullptr, nullptr, nullptr);
    (void)in_state;
    return loss;
}

}  // namespace

double lm_loss_and_grads(const RnnLM& model, const std::vector<std::vector<int>>& sequences,
                         std::vector<Matrix>* grads) {
    if (sequences.empty()) throw ParameterError("empty sequence set");
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& seq : sequences) {
        if (seq.size() < 2) throw ParameterError("sequence shorter than 2 tokens");
        check_token_range(seq, model.vocab_size);
        RnnState state = model.init_state();
        std::vector<int> inputs(seq.begin(), seq.end() - 1);
        std::vector<int> targets(seq.begin() + 1, seq.end());
        total += lm_window(model, inputs, targets, state, grads);
        count += targets.size();
    }
    if (grads)
        for (auto& g : *grads) g *= 1.0 / static_cast<double>(count);
    return total / static_cast<double>(count);
}

std::vector<double> lm_train(RnnLM& model, const std::vector<std::vector<int>>& sequences,
                             const TrainConfig& cfg) {
    if (sequences.empty()) throw ParameterError("empty training corpus");
    for (const auto& s : sequences) {
        if (s.size() < 2) throw ParameterError("sequence shorter than 2 tokens");
        check_token_range(s, model.vocab_size);
    }
    auto params = model.params();
    AdamState adam(params);
    std::vector<double> log;
    log.reserve(cfg.epochs);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::size_t epoch_tokens = 0;
        std::size_t si = 0;
        while (si < sequences.size()) {
            auto grads = make_grads(params);
            std::size_t batch_tokens = 0;
            for (std::size_t bj = 0; bj < cfg.batch_size && si < sequences.size(); ++bj, ++si) {
                const auto& seq = sequences[si];
                RnnState state = model.init_state();
                std::size_t t = 0;
                while (t + 1 < seq.size()) {
                    std::size_t wlen = std::min(cfg.bptt_window, seq.size() - 1 - t);
                    std::vector<int> inputs(seq.begin() + t, seq.begin() + t + wlen);
                    std::vector<int> targets(seq.begin() + t + 1, seq.begin() + t + 1 + wlen);
                    epoch_loss += lm_window(model, inputs, targets, state, &grads);
                    batch_tokens += wlen;
                    t += wlen;
                }
            }
            epoch_tokens += batch_tokens;
            for (auto& g : grads) g *= 1.0 / static_cast<double>(batch_tokens);
            clip_gradients(grads, cfg.gradient_clip_norm);
            adam.step(params, grads, cfg.learning_rate);
        }
        log.push_back(epoch_loss / static_cast<double>(epoch_tokens));
    }
    return log;
}

// ---------------------------------------------------------------------------
// seq2seq
// ---------------------------------------------------------------------------

namespace {

struct S2SGradView {
    Matrix* enc_emb;
    Matrix* dec_emb;
    StackGrads enc, dec;
    Matrix* proj;
    Matrix* proj_b;
};

S2SGradView s2s_grad_view(const Seq2Seq& model, std::vector<Matrix>& grads) {
    S2SGradView v;
    v.enc_emb = &grads[0];
    v.dec_emb = &grads[1];
    std::size_t idx = 2;
    for (std::size_t l = 0; l < model.encoder.size(); ++l) {
        v.enc.wx.push_back(&grads[idx++]);
        v.enc.wh.push_back(&grads[idx++]);
        v.enc.b.push_back(&grads[idx++]);
    }
    for (std::size_t l = 0; l < model.decoder.size(); ++l) {
        v.dec.wx.push_back(&grads[idx++]);
        v.dec.wh.push_back(&grads[idx++]);
        v.dec.b.push_back(&grads[idx++]);
    }
    v.proj = &grads[idx++];
    v.proj_b = &grads[idx++];
    return v;
}

// Summed CE over one pair; teacher forcing.
double s2s_pair(const Seq2Seq& model, const std::vector<int>& src,
                const std::vector<int>& tgt, std::vector<Matrix>* grads,
                Rng* dropout_rng, std::size_t* out_count) {
    if (src.empty()) throw ParameterError("empty source sequence");
    if (tgt.size() < 2) throw ParameterError("target must carry start/end sentinels");
    check_token_range(src, model.source_vocab_size);
    check_token_range(tgt, model.target_vocab_size);

    RnnState enc_state{
        std::vector<std::vector<double>>(model.encoder.size(), std::vector<double>(model.hidden_dim, 0.0)),
        std::vector<std::vector<double>>(model.encoder.size(), std::vector<double>(model.hidden_dim, 0.0))};
    std::vector<std::vector<StepCache>> enc_caches;
    stack_forward(model.encoder, model.enc_embedding, src, enc_state, enc_caches,
                  dropout_rng ? model.encoder_dropout_rate : 0.0, dropout_rng);

    std::vector<int> dec_in(tgt.begin(), tgt.end() - 1);
    std::vector<int> dec_tgt(tgt.begin() + 1, tgt.end());
    RnnState dec_state = enc_state;  // final-state handoff
    std::vector<std::vector<StepCache>> dec_caches;
    stack_forward(model.decoder, model.dec_embedding, dec_in, dec_state, dec_caches,
                  dropout_rng ? model.decoder_dropout_rate : 0.0,
                  model.decoder_dropout_rate > 0.0 ? dropout_rng : nullptr);

    const std::size_t T = dec_in.size();
    double loss = 0.0;
    std::vector<std::vector<double>> dh_top(T, std::vector<double>(model.hidden_dim, 0.0));
    S2SGradView gv;
    if (grads) gv = s2s_grad_view(model, *grads);
    for (std::size_t t = 0; t < T; ++t) {
        const auto& h = dec_caches.back()[t].h;
        auto dist = project_softmax(model.proj, model.proj_b, h);
        double p = std::max(dist[static_cast<std::size_t>(dec_tgt[t])], 1e-300);
        loss += -std::log(p);
        if (grads) {
            std::vector<double> dlogits = dist;
            dlogits[static_cast<std::size_t>(dec_tgt[t])] -= 1.0;
            for (std::size_t r = 0; r < model.proj.rows(); ++r) {
                const double d = dlogits[r];
                (*gv.proj_b)[r] += d;
                double* gp = gv.proj->data() + r * model.proj.cols();
                const double* w = model.proj.data() + r * model.proj.cols();
                for (std::size_t k = 0; k < model.proj.cols(); ++k) {
                    gp[k] += d * h[k];
                    dh_top[t][k] += d * w[k];
                }
            }
        }
    }
    if (grads) {
        std::vector<std::vector<double>> d_init_h, d_init_c;
        stack_backward(model.decoder, dec_caches, dec_in, dh_top, gv.dec, *gv.dec_emb,
                       nullptr, nullptr, &d_init_h, &d_init_c);
        // decoder initial state = encoder final state: gradients flow across
        std::vector<std::vector<double>> zero_top(src.size(),
                                                  std::vector<double>(model.hidden_dim, 0.0));
        stack_backward(model.encoder, enc_caches, src, zero_top, gv.enc, *gv.enc_emb,
                       &d_init_h, &d_init_c, nullptr, nullptr);
    }
    *out_count = T;
    return loss;
}

}  // namespace

double seq2seq_loss_and_grads(const Seq2Seq& model,
                              const std::vector<std::pair<std::vector<int>, std::vector<int>>>& pairs,
                              std::vector<Matrix>* grads, Rng* dropout_rng) {
    if (pairs.empty()) throw ParameterError("empty pair list");
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& [src, tgt] : pairs) {
        std::size_t n = 0;
        total += s2s_pair(model, src, tgt, grads, dropout_rng, &n);
        count += n;
    }
    if (grads)
        for (auto& g : *grads) g *= 1.0 / static_cast<double>(count);
    return total / static_cast<double>(count);
}

std::vector<double> seq2seq_train(Seq2Seq& model,
                                  const std::vector<std::pair<std::vector<int>, std::vector<int>>>& pairs,
                                  const TrainConfig& cfg) {
    if (pairs.empty()) throw ParameterError("empty pair list");
    auto params = model.params();
    AdamState adam(params);
    Rng dropout_rng(cfg.rng_seed);
    std::vector<double> log;
    log.reserve(cfg.epochs);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::size_t epoch_tokens = 0;
        std::size_t pi = 0;
        while (pi < pairs.size()) {
            auto grads = make_grads(params);
            std::size_t batch_tokens = 0;
            for (std::size_t bj = 0; bj < cfg.batch_size && pi < pairs.size(); ++bj, ++pi) {
                std::size_t n = 0;
                epoch_loss += s2s_pair(model, pairs[pi].first, pairs[pi].second, &grads,
                                       &dropout_rng, &n);
                batch_tokens += n;
            }
            epoch_tokens += batch_tokens;
            for (auto& g : grads) g *= 1.0 / static_cast<double>(batch_tokens);
            clip_gradients(grads, cfg.gradient_clip_norm);
            adam.step(params, grads, cfg.learning_rate);
        }
        log.push_back(epoch_loss / static_cast<double>(epoch_tokens));
    }
    return log;
}

std::vector<int> seq2seq_greedy_decode(const Seq2Seq& model, const std::vector<int>& source,
                                       int start_id, int end_id, std::size_t max_len) {
    check_token_range(source, model.source_vocab_size);
    RnnState state{
        std::vector<std::vector<double>>(model.encoder.size(), std::vector<double>(model.hidden_dim, 0.0)),
        std::vector<std::vector<double>>(model.encoder.size(), std::vector<double>(model.hidden_dim, 0.0))};
    std::vector<std::vector<StepCache>> caches;
    stack_forward(model.encoder, model.enc_embedding, source, state, caches, 0.0, nullptr);

    std::vector<int> out;
    int cur = start_id;
    // max_len caps the decoded length including the start sentinel
    std::size_t produced = 1;
    while (produced < max_len) {
        std::vector<std::vector<StepCache>> dc;
        stack_forward(model.decoder, model.dec_embedding, {cur}, state, dc, 0.0, nullptr);
        auto dist = project_softmax(model.proj, model.proj_b, dc.back()[0].h);
        int next = argmax_index(dist);
        ++produced;
        if (next == end_id) break;
        out.push_back(next);
        cur = next;
    }
    return out;
}

// ---------------------------------------------------------------------------
// sampling
// ---------------------------------------------------------------------------

int sample_categorical(const std::vector<double>& dist, double temperature, Rng& rng) {
    if (temperature <= 0.0) throw ParameterError("temperature must be > 0");
    if (dist.empty()) throw ParameterError("empty distribution");
    double sum = 0.0;
    for (double p : dist) sum += p;
    if (std::abs(sum - 1.0) > 1e-6) throw ParameterError("distribution is not normalized");

    std::vector<double> w(dist.size());
    double wsum = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        w[i] = dist[i] > 0.0 ? std::exp(std::log(dist[i]) / temperature) : 0.0;
        wsum += w[i];
    }
    double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        cum += w[i] / wsum;
        if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(w.size() - 1);
}

int argmax_index(const std::vector<double>& dist) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < dist.size(); ++i)
        if (dist[i] > dist[best]) best = i;
    return static_cast<int>(best);
}

void clip_gradients(std::vector<Matrix>& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& g : grads)
        for (std::size_t i = 0; i < g.size(); ++i) sq += g[i] * g[i];
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        double s = max_norm / norm;
        for (auto& g : grads) g *= s;
    }
}

// ---------------------------------------------------------------------------
// gradient check
// ---------------------------------------------------------------------------

double gradient_check(const std::vector<NamedParam>& params,
                      const std::vector<Matrix>& analytic,
                      const std::function<double()>& loss) {
    const double h = 1e-4;
    double max_rel = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix& w = *params[p].tensor;
        for (std::size_t i = 0; i < w.size(); ++i) {
            double save = w[i];
            w[i] = save + h;
            double lp = loss();
            w[i] = save - h;
            double lm = loss();
            w[i] = save;
            double numeric = (lp - lm) / (2.0 * h);
            double a = analytic[p][i];
            // the 1e-5 floor keeps finite-difference cancellation noise on
            // near-zero entries from dominating the comparison
            double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-5});
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

// ---------------------------------------------------------------------------
// checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'S', 'N', 'N'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
}
void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& s, double d) {
    auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
public:
    explicit Reader(const std::string& s) : s_(s) {}
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(s_[pos_++]);
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint8_t>(s_[pos_]) |
                          (static_cast<std::uint16_t>(static_cast<std::uint8_t>(s_[pos_ + 1])) << 8);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(s_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(s_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(v);
    }
    std::string str(std::size_t n) {
        need(n);
        std::string out = s_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    bool done() const { return pos_ == s_.size(); }

private:
    void need(std::size_t n) {
        if (pos_ + n > s_.size()) throw FormatError("truncated checkpoint");
    }
    const std::string& s_;
    std::size_t pos_ = 0;
};

std::string save_params(const std::vector<NamedParam>& params, std::uint8_t kind) {
    std::string out(kMagic, 4);
    put_u16(out, kVersion);
    out.push_back(static_cast<char>(kind));
    for (const auto& p : params) {
        put_u16(out, static_cast<std::uint16_t>(p.name.size()));
        out += p.name;
        out.push_back(2);  // rank
        put_u32(out, static_cast<std::uint32_t>(p.tensor->rows()));
        put_u32(out, static_cast<std::uint32_t>(p.tensor->cols()));
        for (std::size_t i = 0; i < p.tensor->size(); ++i) put_f64(out, (*p.tensor)[i]);
    }
    return out;
}

void load_params(std::vector<NamedParam> params, std::uint8_t expected_kind,
                 const std::string& bytes) {
    Reader r(bytes);
    if (r.str(4) != std::string(kMagic, 4)) throw FormatError("bad checkpoint magic");
    if (r.u16() != kVersion) throw FormatError("unsupported checkpoint version");
    if (r.u8() != expected_kind) throw FormatError("checkpoint model kind mismatch");
    for (auto& p : params) {
        std::string name = r.str(r.u16());
        if (name != p.name) throw FormatError("unexpected tensor '" + name + "'");
        if (r.u8() != 2) throw FormatError("unsupported tensor rank for '" + name + "'");
        std::uint32_t rows = r.u32();
        std::uint32_t cols = r.u32();
        if (rows != p.tensor->rows() || cols != p.tensor->cols())
            throw FormatError("dimension mismatch for '" + name + "': checkpoint " +
                              std::to_string(rows) + "x" + std::to_string(cols) + ", model " +
                              std::to_string(p.tensor->rows()) + "x" +
                              std::to_string(p.tensor->cols()));
        for (std::size_t i = 0; i < p.tensor->size(); ++i) (*p.tensor)[i] = r.f64();
    }
    if (!r.done()) throw FormatError("trailing bytes in checkpoint");
}

}  // namespace

std::string save_checkpoint(const RnnLM& model) { return save_params(model.params(), 0); }
std::string save_checkpoint(const Seq2Seq& model) { return save_params(model.params(), 1); }
void load_checkpoint(RnnLM& model, const std::string& bytes) {
    load_params(model.params(), 0, bytes);
}
void load_checkpoint(Seq2Seq& model, const std::string& bytes) {
    load_params(model.params(), 1, bytes);
}

}  // namespace seedgen
