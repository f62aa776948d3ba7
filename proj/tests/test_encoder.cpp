#include <cmath>
#include <string>
#include <vector>

#include "gtest/gtest.h"

#include "seqsent/encoder.hpp"
#include "seqsent/model.hpp"

using namespace seqsent;

namespace {

// Gate equations written out scalar by scalar, reading weights as
// W[k][j] with k over [x ‖ h]; shares no code with lstm_step.
struct OracleLstm {
    const LstmParams<double>& p;

    static double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

    void step(const std::vector<double>& x, std::vector<double>& h, std::vector<double>& c) const {
        const std::size_t I = p.input_dim, H = p.hidden_dim;
        std::vector<double> nh(H), nc(H);
        for (std::size_t j = 0; j < H; ++j) {
            double zi = p.b_input(0, j), zf = p.b_forget(0, j), zo = p.b_output(0, j), zg = p.b_cell(0, j);
            for (std::size_t k = 0; k < I + H; ++k) {
                double in = k < I ? x[k] : h[k - I];
                zi += in * p.w_input(k, j);
                zf += in * p.w_forget(k, j);
                zo += in * p.w_output(k, j);
                zg += in * p.w_cell(k, j);
            }
            nc[j] = sig(zf) * c[j] + sig(zi) * std::tanh(zg);
            nh[j] = sig(zo) * std::tanh(nc[j]);
        }
        h = nh;
        c = nc;
    }

    std::vector<double> run(const std::vector<std::vector<double>>& xs, bool reverse) const {
        std::vector<double> h(p.hidden_dim, 0.0), c(p.hidden_dim, 0.0);
        for (std::size_t t = 0; t < xs.size(); ++t) step(xs[reverse ? xs.size() - 1 - t : t], h, c);
        return h;
    }
};

std::vector<double> oracle_bilstm(const LstmParams<double>& f, const LstmParams<double>& b,
                                  const std::vector<std::vector<double>>& xs) {
    auto hf = OracleLstm{f}.run(xs, false);
    auto hb = OracleLstm{b}.run(xs, true);
    hf.insert(hf.end(), hb.begin(), hb.end());
    return hf;
}

std::vector<double> rand_vec(Rng& rng, std::size_t n, double r = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(rng, -r, r);
    return v;
}

void randomize(LstmParams<double>& p, Rng& rng, double r = 0.8) {
    p.for_each_tensor("p", [&](const std::string&, Tensor2<double>& t) { t.fill_uniform(rng, -r, r); });
}

}  // namespace

TEST(LstmStep, ZeroParametersGiveZeroState) {
    LstmParams<double> p(3, 4);
    std::vector<double> x{0.3, -1.0, 2.0}, h(4, 0.0), c(4, 0.0);
    auto s = lstm_step<double>(p, x, h, c);
    for (double v : s.c) EXPECT_EQ(v, 0.0);
    for (double v : s.h) EXPECT_EQ(v, 0.0);
}

TEST(LstmStep, ForgetBiasOnlyKeepsZeroCell) {
    LstmParams<double> p(3, 2);
    p.b_forget.fill(1.0);
    std::vector<double> h(2, 0.0), c(2, 0.0);
    for (double scale : {-5.0, 0.1, 7.0}) {
        std::vector<double> x{scale, 2 * scale, -scale};
        auto s = lstm_step<double>(p, x, h, c);
        for (double v : s.c) EXPECT_EQ(v, 0.0);
    }
}

TEST(LstmStep, MatchesOracle) {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        LstmParams<double> p(3, 3);
        randomize(p, rng);
        auto x = rand_vec(rng, 3), h = rand_vec(rng, 3), c = rand_vec(rng, 3);
        auto s = lstm_step<double>(p, x, h, c);
        auto oh = h, oc = c;
        OracleLstm{p}.step(x, oh, oc);
        for (int j = 0; j < 3; ++j) {
            EXPECT_NEAR(s.h[j], oh[j], 1e-12);
            EXPECT_NEAR(s.c[j], oc[j], 1e-12);
        }
    }
}

TEST(LstmStep, DimensionMismatchThrows) {
    LstmParams<double> p(3, 2);
    std::vector<double> x(2), h(2), c(2);
    EXPECT_THROW(lstm_step<double>(p, x, h, c), InvalidArgument);
}

TEST(LstmStep, InitHasForgetBiasOne) {
    Rng rng(1);
    auto p = init_lstm<double>(5, 4, rng);
    for (double b : p.b_forget.flat()) EXPECT_EQ(b, 1.0);
    for (double b : p.b_input.flat()) EXPECT_EQ(b, 0.0);
    EXPECT_EQ(p.w_cell.rows(), 9u);
    EXPECT_EQ(p.w_cell.cols(), 4u);
    const double bound = std::sqrt(6.0 / 13.0);
    for (double w : p.w_input.flat()) EXPECT_LE(std::abs(w), bound);
}

TEST(LstmStep, GradCheck) {
    Rng rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        LstmParams<double> p(2 + trial % 3, 1 + trial % 4);
        randomize(p, rng);
        auto x = rand_vec(rng, p.input_dim), h = rand_vec(rng, p.hidden_dim), c = rand_vec(rng, p.hidden_dim);
        auto ph = rand_vec(rng, p.hidden_dim), pc = rand_vec(rng, p.hidden_dim);
        auto loss = [&] {
            auto s = lstm_step<double>(p, x, h, c);
            double t = 0;
            for (std::size_t j = 0; j < ph.size(); ++j) t += ph[j] * s.h[j] + pc[j] * s.c[j];
            return t;
        };
        LstmStepCache<double> cache;
        lstm_step<double>(p, x, h, c, &cache);
        LstmParams<double> g(p.input_dim, p.hidden_dim);
        auto d = lstm_step_backward<double>(p, cache, ph, pc, g);
        std::vector<GradCheckEntry<double>> entries{{"x", x, d.dx}, {"h", h, d.dh_prev}, {"c", c, d.dc_prev}};
        std::vector<Tensor2<double>*> gs;
        g.for_each_tensor("g", [&](const std::string&, Tensor2<double>& t) { gs.push_back(&t); });
        std::size_t i = 0;
        p.for_each_tensor("lstm", [&](const std::string& name, Tensor2<double>& t) {
            entries.push_back({name, t.flat(), gs[i++]->flat()});
        });
        auto rep = grad_check<double>(loss, entries, 1e-5, 1e-4);
        ASSERT_TRUE(rep.pass) << rep.worst << " " << rep.worst_error;
    }
}

TEST(CharTokenEmbed, SingleCharacterShape) {
    Rng rng(3);
    auto f = init_lstm<double>(25, 25, rng), b = init_lstm<double>(25, 25, rng);
    auto table = random_embeddings<double>(10, 25, rng);
    std::vector<std::size_t> chars{4};
    auto c = char_token_embed<double>(f, b, chars, table);
    EXPECT_EQ(c.size(), 50u);
    // one step each way from the same input
    std::vector<std::vector<double>> xs{{table.row(4).begin(), table.row(4).end()}};
    auto o = oracle_bilstm(f, b, xs);
    for (std::size_t k = 0; k < 50; ++k) EXPECT_NEAR(c[k], o[k], 1e-12);
}

TEST(CharTokenEmbed, PalindromeWithTiedParamsIsSymmetric) {
    Rng rng(4);
    auto f = init_lstm<double>(6, 5, rng);
    auto table = random_embeddings<double>(8, 6, rng);
    std::vector<std::size_t> chars{2, 5, 3, 5, 2};
    auto c = char_token_embed<double>(f, f, chars, table);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(c[k], c[k + 5]);
}

TEST(CharTokenEmbed, MatchesOracleOnToken) {
    Rng rng(5);
    auto f = init_lstm<double>(25, 25, rng), b = init_lstm<double>(25, 25, rng);
    Vocab v;
    v.add_char(U't');
    v.add_char(U'o');
    auto table = random_embeddings<double>(v.char_count(), 25, rng);
    auto chars = v.char_indices("to");
    auto c = char_token_embed<double>(f, b, chars, table);
    std::vector<std::vector<double>> xs;
    for (auto i : chars) xs.emplace_back(table.row(i).begin(), table.row(i).end());
    auto o = oracle_bilstm(f, b, xs);
    ASSERT_EQ(c.size(), o.size());
    for (std::size_t k = 0; k < c.size(); ++k) EXPECT_NEAR(c[k], o[k], 1e-12);
}

TEST(CharTokenEmbed, EmptyThrows) {
    LstmParams<double> f(2, 2);
    EmbeddingTable<double> t(3, 2);
    std::vector<std::size_t> none;
    EXPECT_THROW(char_token_embed<double>(f, f, none, t), InvalidArgument);
}

TEST(HybridEmbed, DimensionsAndDeterminism) {
    auto corpus = parse_rct_string("###1\nA\tthe cat sat\n").abstracts;
    auto v = build_vocab(corpus, 1);
    Rng rng(6);
    for (auto [cdim, tdim] : {std::pair<std::size_t, std::size_t>{50, 300}, {4, 8}}) {
        auto f = init_lstm<double>(25, cdim / 2, rng), b = init_lstm<double>(25, cdim / 2, rng);
        auto chars = random_embeddings<double>(v.char_count(), 25, rng);
        auto toks = random_embeddings<double>(v.token_count(), tdim, rng);
        auto e1 = hybrid_embed<double>("cat", v, f, b, chars, toks);
        auto e2 = hybrid_embed<double>("cat", v, f, b, chars, toks);
        EXPECT_EQ(e1.size(), cdim + tdim);
        EXPECT_EQ(e1, e2);
        auto t = lookup_token(toks, v, "cat");
        for (std::size_t k = 0; k < tdim; ++k) EXPECT_EQ(e1[cdim + k], t[k]);
    }
    EXPECT_THROW(hybrid_embed<double>("", v, LstmParams<double>(25, 1), LstmParams<double>(25, 1),
                                      EmbeddingTable<double>(v.char_count(), 25),
                                      EmbeddingTable<double>(v.token_count(), 2)),
                 InvalidArgument);
}

TEST(SentenceEncode, ShapeAndOracle) {
    Rng rng(7);
    auto f = init_lstm<double>(350, 100, rng), b = init_lstm<double>(350, 100, rng);
    std::vector<std::vector<double>> one{rand_vec(rng, 350)};
    EXPECT_EQ(sentence_encode<double>(f, b, one).size(), 200u);

    auto f3 = init_lstm<double>(4, 3, rng), b3 = init_lstm<double>(4, 3, rng);
    std::vector<std::vector<double>> xs{rand_vec(rng, 4), rand_vec(rng, 4), rand_vec(rng, 4)};
    auto s = sentence_encode<double>(f3, b3, xs);
    auto o = oracle_bilstm(f3, b3, xs);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(s[k], o[k], 1e-12);

    EXPECT_THROW(sentence_encode<double>(f3, b3, {}), InvalidArgument);
}

TEST(SentenceEncode, ReversalSwapsHalves) {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        auto f = init_lstm<double>(3, 2, rng), b = init_lstm<double>(3, 2, rng);
        std::vector<std::vector<double>> xs;
        for (std::size_t t = 0, n = 1 + uniform_index(rng, 6); t < n; ++t) xs.push_back(rand_vec(rng, 3, 2.0));
        auto s = sentence_encode<double>(f, b, xs);
        std::vector<std::vector<double>> rev(xs.rbegin(), xs.rend());
        auto r = sentence_encode<double>(b, f, rev);
        for (std::size_t k = 0; k < 2; ++k) {
            ASSERT_EQ(s[k], r[k + 2]);
            ASSERT_EQ(s[k + 2], r[k]);
        }
        for (double x : s) ASSERT_TRUE(std::isfinite(x));
    }
}

TEST(ModelForward, FiniteForLargeInputs) {
    Rng rng(9);
    const std::vector<std::size_t> tokens{2, 3, 2}, chars{2, 3, 4, 2};
    std::vector<EncodedToken> sentence;
    for (auto t : tokens) sentence.push_back({t, chars});
    for (int trial = 0; trial < 100; ++trial) {
        auto p = init_model<double>(ModelDims{3, 4, 5, 6, 4}, 5, 6, 3, trial % 2 == 0, rng);
        const double r = trial < 50 ? 10.0 : 1e3;
        p.for_each_tensor([&](const std::string&, Tensor2<double>& t) { t.fill_uniform(rng, -r, r); });
        EncodedAbstract a;
        for (std::size_t i = 0, n = 1 + uniform_index(rng, 4); i < n; ++i) {
            a.sentences.push_back(sentence);
            a.labels.push_back(uniform_index(rng, 3));
        }
        auto e = compute_emissions(p, a);
        for (double x : e.flat()) {
            ASSERT_TRUE(std::isfinite(x)) << "trial " << trial;
            ASSERT_LE(x, 0.0);
        }
        ASSERT_TRUE(std::isfinite(abstract_loss(p, a)));
    }
}

TEST(LabelScores, ZeroWeightsUniform) {
    for (std::size_t classes : {2u, 5u, 6u}) {
        FeedForwardParams<double> ff(8, 3, classes);
        std::vector<double> s(8, 0.7);
        auto a = label_scores<double>(ff, s);
        ASSERT_EQ(a.size(), classes);
        for (double x : a) EXPECT_NEAR(x, -std::log(static_cast<double>(classes)), 1e-15);
    }
}

TEST(LabelScores, NormalizedAndDimensionChecked) {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        auto ff = init_feedforward<double>(6, 4, 5, rng);
        auto a = label_scores<double>(ff, rand_vec(rng, 6, 3.0));
        double sum = 0.0;
        for (double x : a) sum += std::exp(x);
        ASSERT_NEAR(sum, 1.0, 1e-12);
    }
    FeedForwardParams<double> ff(6, 4, 5);
    std::vector<double> wrong(5);
    EXPECT_THROW(label_scores<double>(ff, wrong), InvalidArgument);
}

TEST(LabelScores, GradCheck) {
    Rng rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        auto ff = init_feedforward<double>(4, 3, 3, rng);
        auto s = rand_vec(rng, 4, 2.0);
        auto proj = rand_vec(rng, 3);
        auto loss = [&] {
            auto a = label_scores<double>(ff, s);
            double t = 0;
            for (int k = 0; k < 3; ++k) t += proj[k] * a[k];
            return t;
        };
        FeedForwardCache<double> cache;
        label_scores<double>(ff, s, &cache);
        FeedForwardParams<double> g(4, 3, 3);
        auto ds = label_scores_backward<double>(ff, cache, proj, g);
        std::vector<GradCheckEntry<double>> entries{{"s", s, ds},
                                                    {"w_hidden", ff.w_hidden.flat(), g.w_hidden.flat()},
                                                    {"b_hidden", ff.b_hidden.flat(), g.b_hidden.flat()},
                                                    {"w_out", ff.w_out.flat(), g.w_out.flat()},
                                                    {"b_out", ff.b_out.flat(), g.b_out.flat()}};
        auto rep = grad_check<double>(loss, entries, 1e-5, 1e-4);
        ASSERT_TRUE(rep.pass) << rep.worst << " " << rep.worst_error;
    }
}

TEST(BiLstm, GradCheckThroughSequence) {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto f = init_lstm<double>(3, 2, rng), b = init_lstm<double>(3, 3, rng);
        std::vector<std::vector<double>> xs;
        for (std::size_t t = 0, n = 1 + uniform_index(rng, 4); t < n; ++t) xs.push_back(rand_vec(rng, 3));
        auto proj = rand_vec(rng, 5);
        auto loss = [&] {
            auto o = bilstm_encode<double>(f, b, xs);
            double t = 0;
            for (int k = 0; k < 5; ++k) t += proj[k] * o[k];
            return t;
        };
        BiLstmCache<double> cache;
        bilstm_encode<double>(f, b, xs, &cache);
        LstmParams<double> gf(3, 2), gb(3, 3);
        auto dxs = bilstm_backward<double>(f, b, cache, proj, gf, gb);
        std::vector<GradCheckEntry<double>> entries;
        for (std::size_t t = 0; t < xs.size(); ++t) entries.push_back({"x" + std::to_string(t), xs[t], dxs[t]});
        entries.push_back({"f.w_cell", f.w_cell.flat(), gf.w_cell.flat()});
        entries.push_back({"b.w_forget", b.w_forget.flat(), gb.w_forget.flat()});
        entries.push_back({"b.b_output", b.b_output.flat(), gb.b_output.flat()});
        auto rep = grad_check<double>(loss, entries, 1e-5, 1e-4);
        ASSERT_TRUE(rep.pass) << rep.worst << " " << rep.worst_error;
    }
}

TEST(ModelShapes, DefaultDimsMatchArchitecture) {
    ModelDims d;
    EXPECT_EQ(d.char_dim, 25u);
    EXPECT_EQ(d.char_token_dim, 50u);
    EXPECT_EQ(d.token_dim, 300u);
    EXPECT_EQ(d.hybrid_dim(), 350u);
    EXPECT_EQ(d.sentence_dim, 200u);
    Rng rng(1);
    auto p = init_model<double>(d, 20, 10, 5, true, rng);
    EXPECT_EQ(p.sent_fwd.input_dim, 350u);
    EXPECT_EQ(p.sent_fwd.hidden_dim + p.sent_bwd.hidden_dim, 200u);
    EXPECT_EQ(p.char_fwd.hidden_dim + p.char_bwd.hidden_dim, 50u);
    EXPECT_EQ(p.ff.num_classes(), 5u);

    ModelDims odd = d;
    odd.sentence_dim = 7;
    EXPECT_THROW(odd.validate(), InvalidArgument);
}

TEST(ModelShapes, OutputDimsFollowConfig) {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        ModelDims d{1 + uniform_index(rng, 5), 2 * (1 + uniform_index(rng, 4)), 1 + uniform_index(rng, 6),
                    2 * (1 + uniform_index(rng, 4)), 1 + uniform_index(rng, 5)};
        std::size_t C = 2 + uniform_index(rng, 4);
        auto corpus = parse_rct_string("###1\nA\tab c .\nB\tde .\n").abstracts;
        auto v = build_vocab(corpus, 1);
        auto p = init_model<double>(d, v.token_count(), v.char_count(), C, true, rng);
        auto e = hybrid_embed<double>("ab", v, p.char_fwd, p.char_bwd, p.char_emb, p.token_emb);
        ASSERT_EQ(e.size(), d.char_token_dim + d.token_dim);
        auto enc = encode_abstract(corpus[0], v, nullptr);
        auto em = compute_emissions(p, enc);
        ASSERT_EQ(em.rows(), 2u);
        ASSERT_EQ(em.cols(), C);
        ASSERT_TRUE(em.all_finite());
    }
}
