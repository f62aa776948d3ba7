// seqsent: train, evaluate, predict with, and inspect sequential sentence
// classifiers over labeled-abstract corpora.
//
// Exit status: 0 success, 1 numeric failure, 2 missing or invalid input,
// 3 model/data mismatch.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seqsent/seqsent.hpp"

namespace fs = std::filesystem;
using namespace seqsent;

namespace {

enum ExitCode { kOk = 0, kNumeric = 1, kBadInput = 2, kMismatch = 3 };

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string require_file(const fs::path& p) {
    if (!fs::is_regular_file(p)) throw InputError("missing file: " + p.string());
    return p.string();
}

ModelDims parse_dims(const std::string& text) {
    std::vector<std::size_t> v;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        std::size_t used = 0;
        unsigned long long x = 0;
        try {
            x = std::stoull(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != part.size()) throw InputError("--dims: '" + part + "' is not a positive integer");
        v.push_back(static_cast<std::size_t>(x));
    }
    if (v.size() != 5) throw InputError("--dims expects d_char,d_ctok,d_tok,d_sent,ff");
    ModelDims d{v[0], v[1], v[2], v[3], v[4]};
    d.validate();
    return d;
}

struct TrainArgs {
    std::string data, out, dims, pretrained;
    TrainConfig config;
    bool no_start = false;
};

int cmd_train(TrainArgs& args) {
    const fs::path dir(args.data);
    const auto train_path = require_file(dir / "train.txt");
    const auto dev_path = require_file(dir / "dev.txt");
    if (!args.dims.empty()) args.config.dims = parse_dims(args.dims);
    if (!args.pretrained.empty()) args.config.pretrained = require_file(args.pretrained);
    args.config.start_scores = !args.no_start;
    args.config.validate();

    auto train_set = parse_rct_file(train_path);
    auto dev_set = parse_rct_file(dev_path);
    auto result = train<float>(args.config, train_set, dev_set.abstracts, [](const EpochLog& e, const ModelParams<float>&) {
        std::printf("epoch %zu train_loss %.6f valid_f1 %.2f\n", e.epoch, e.train_loss, 100.0 * e.validation_f1);
        std::fflush(stdout);
    });
    save_checkpoint_file(args.out, result.checkpoint);
    std::printf("best epoch %zu, checkpoint written to %s\n", result.best_epoch, args.out.c_str());
    return kOk;
}

Checkpoint<float> open_model(const std::string& path) {
    return load_checkpoint_file<float>(require_file(path));
}

int cmd_eval(const std::string& model_path, const std::string& data, const std::string& format) {
    auto ck = open_model(model_path);
    fs::path file(data);
    if (fs::is_directory(file)) file /= "test.txt";
    auto corpus = parse_rct_file(require_file(file));
    auto encoded = encode_corpus(corpus.abstracts, ck.vocab, &ck.labels);
    auto table = evaluate(ck.params, encoded, ck.labels);
    std::fputs((format == "kv" ? render_kv(table) : render_table(table)).c_str(), stdout);
    return kOk;
}

int cmd_predict(const std::string& model_path, const std::string& data, const std::string& out_path) {
    auto ck = open_model(model_path);
    auto corpus = parse_rct_file(require_file(data));
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw InputError("cannot write " + out_path);
    }
    std::ostream& out = out_path.empty() ? std::cout : file;
    for (const auto& a : corpus.abstracts) {
        auto labels = predict(ck.params, encode_abstract(a, ck.vocab, nullptr)).labels;
        out << "###" << a.id << '\n';
        for (std::size_t i = 0; i < a.sentences.size(); ++i)
            out << ck.labels.name(labels[i]) << '\t' << a.sentences[i].text << '\n';
        out << '\n';
    }
    return kOk;
}

int cmd_inspect(const std::string& model_path, bool raw) {
    auto ck = open_model(model_path);
    const auto& chain = ck.params.chain;
    const auto& names = ck.labels.names();
    std::size_t width = 5;
    for (const auto& n : names) width = std::max(width, n.size());
    const int w = static_cast<int>(width);
    const int cw = static_cast<int>(std::max<std::size_t>(width, 8));

    auto shown = raw ? chain.transitions : normalized_transitions(chain);
    std::printf("%s (rows: previous label, columns: current label)\n", raw ? "transition scores" : "transition probabilities");
    std::printf("%-*s", w, "");
    for (const auto& n : names) std::printf(" %*s", cw, n.c_str());
    std::printf("\n");
    for (std::size_t j = 0; j < names.size(); ++j) {
        std::printf("%-*s", w, names[j].c_str());
        for (std::size_t k = 0; k < names.size(); ++k) std::printf(" %*.4f", cw, shown(j, k));
        std::printf("\n");
    }
    if (!chain.use_start) {
        std::printf("%-*s disabled\n", w, "start");
        return kOk;
    }
    auto start = raw ? Vec<float>(chain.start.flat().begin(), chain.start.flat().end()) : softmax<float>(chain.start.flat());
    std::printf("%-*s", w, "start");
    for (float v : start) std::printf(" %*.4f", cw, v);
    std::printf("\n");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential sentence classification for abstracts"};
    app.require_subcommand(1);

    TrainArgs targs;
    auto* train_cmd = app.add_subcommand("train", "Train a model on <data>/train.txt, selecting epochs on <data>/dev.txt");
    train_cmd->add_option("--data", targs.data, "Directory containing train.txt and dev.txt")->required();
    train_cmd->add_option("--out", targs.out, "Checkpoint to write")->required();
    train_cmd->add_option("--seed", targs.config.seed, "Random seed");
    train_cmd->add_option("--epochs", targs.config.epochs, "Number of epochs");
    train_cmd->add_option("--lr", targs.config.learning_rate, "SGD learning rate");
    train_cmd->add_option("--dropout", targs.config.dropout, "Dropout rate in [0,1)");
    train_cmd->add_option("--clip", targs.config.clip, "Global gradient norm clip");
    train_cmd->add_option("--patience", targs.config.patience, "Epochs without validation gain before stopping (0: never)");
    train_cmd->add_option("--min-count", targs.config.min_count, "Minimum token frequency for the vocabulary");
    train_cmd->add_option("--dims", targs.dims, "d_char,d_ctok,d_tok,d_sent,ff");
    train_cmd->add_flag("--no-start-scores", targs.no_start, "Drop the first-sentence start scores");
    train_cmd->add_option("--pretrained", targs.pretrained, "Word vectors in text format");

    std::string model, data, format = "table", out;
    bool raw = false;
    auto* eval_cmd = app.add_subcommand("eval", "Print per-label precision, recall and F1");
    eval_cmd->add_option("--model", model, "Checkpoint")->required();
    eval_cmd->add_option("--data", data, "Labeled file, or a directory containing test.txt")->required();
    eval_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "kv"}));

    auto* predict_cmd = app.add_subcommand("predict", "Label every sentence of every abstract");
    predict_cmd->add_option("--model", model, "Checkpoint")->required();
    predict_cmd->add_option("--data", data, "Input file; labels may be '?'")->required();
    predict_cmd->add_option("--out", out, "Output file (default: stdout)");

    auto* inspect_cmd = app.add_subcommand("inspect", "Print the learned transition matrix");
    inspect_cmd->add_option("--model", model, "Checkpoint")->required();
    inspect_cmd->add_flag("--raw", raw, "Print raw scores instead of row-normalized probabilities");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kBadInput;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(targs);
        if (eval_cmd->parsed()) return cmd_eval(model, data, format);
        if (predict_cmd->parsed()) return cmd_predict(model, data, out);
        if (inspect_cmd->parsed()) return cmd_inspect(model, raw);
    } catch (const Mismatch& e) {
        std::fprintf(stderr, "seqsent: %s\n", e.what());
        return kMismatch;
    } catch (const NumericFailure& e) {
        std::fprintf(stderr, "seqsent: %s\n", e.what());
        return kNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "seqsent: %s\n", e.what());
        return kBadInput;
    }
    return kBadInput;
}
