// Command-line front end: encode / train / eval / explain / gradcheck / synth.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdfcn/dataset.hpp"
#include "mdfcn/fcn.hpp"
#include "mdfcn/gradcam.hpp"
#include "mdfcn/gradcheck.hpp"
#include "mdfcn/mdf.hpp"
#include "mdfcn/netpbm.hpp"
#include "mdfcn/ordinal.hpp"
#include "mdfcn/series.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mdfcn;

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("MDFCN_OUT_DIR");
    return env ? std::string(env) : std::string(".");
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json j;
    in >> j;
    return j;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Flags override config-file values; the config file mirrors the flag names.
void apply_config_file(CLI::App& app, const std::string& path) {
    if (path.empty()) return;
    const json cfg = read_json(path);
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        CLI::Option* opt = app.get_option_no_throw("--" + it.key());
        if (!opt) {
            throw std::runtime_error("unknown config key '" + it.key() + "'");
        }
        if (opt->count() > 0) continue;  // CLI flag wins
        std::string value = it.value().is_string()
                                ? it.value().get<std::string>()
                                : it.value().dump();
        opt->add_result(value);
        opt->run_callback();
    }
}

struct EncodeArgs {
    std::string input, out = default_out_dir(), config;
    std::size_t n = 3;
    bool channel_images = false;
};

int cmd_encode(const EncodeArgs& a) {
    LabelTable labels;
    const auto series = load_ucr_file(a.input, labels);
    const auto images = encode_all(series, a.n);
    fs::create_directories(a.out);
    const fs::path out(a.out);
    save_mdf_records((out / "records.mdf").string(), images);
    if (a.channel_images) {
        for (std::size_t i = 0; i < images.size(); ++i) {
            for (std::size_t c = 0; c < images[i].channels.size(); ++c) {
                std::ostringstream name;
                name << "series_" << i << "_ch" << (c + 1) << ".pgm";
                write_pgm16((out / name.str()).string(), images[i].channels[c]);
            }
        }
    }
    json manifest = {{"command", "encode"},
                     {"n", a.n},
                     {"input", a.input},
                     {"input_fingerprint", fingerprint_file(a.input)},
                     {"series", images.size()},
                     {"channels", images[0].channels.size()},
                     {"d_max", images[0].d_max()},
                     {"width", images[0].width()},
                     {"label_values", labels}};
    write_json(out / "manifest.json", manifest);
    std::cout << "encoded " << images.size() << " series to " << a.out << "\n";
    return 0;
}

struct TrainArgs {
    std::string train, out = default_out_dir(), config;
    std::size_t n = 3;
    std::vector<std::size_t> filters = {16, 32, 16};
    std::vector<std::size_t> strides;
    bool cv = false;
    std::size_t epochs = 200;
    std::size_t batch = 16;
    unsigned seed = 1;
    double lr = 0.001;
};

int cmd_train(const TrainArgs& a) {
    if (a.filters.size() != 3) throw std::invalid_argument("--filters needs 3 values");
    if (!a.strides.empty() && a.strides.size() != 3) {
        throw std::invalid_argument("--strides needs 3 values");
    }
    LabelTable labels;
    const auto raw = load_ucr_file(a.train, labels);
    const NormBounds bounds = compute_bounds(raw);
    const auto images = encode_all(minmax_normalize(raw, bounds), a.n);

    TrainConfig cfg;
    cfg.filters = {a.filters[0], a.filters[1], a.filters[2]};
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch;
    cfg.seed = a.seed;
    cfg.learning_rate = a.lr;
    cfg.motif_length = a.n;
    if (a.cv) {
        cfg.strides = cross_validate_strides(images, cfg);
        std::cout << "cross-validation chose strides (" << cfg.strides[0] << ","
                  << cfg.strides[1] << "," << cfg.strides[2] << ")\n";
    } else if (!a.strides.empty()) {
        cfg.strides = {a.strides[0], a.strides[1], a.strides[2]};
    }

    TrainedArtifact art = train(images, cfg);
    art.bounds = bounds;
    fs::create_directories(a.out);
    save_artifact(a.out, art);

    const double final_loss = art.loss_history.empty()
                                  ? 0.0
                                  : *std::min_element(art.loss_history.begin(),
                                                      art.loss_history.end());
    json manifest = {{"command", "train"},
                     {"n", a.n},
                     {"filters", cfg.filters},
                     {"strides", cfg.strides},
                     {"cv", a.cv},
                     {"epochs", cfg.epochs},
                     {"batch", cfg.batch_size},
                     {"seed", cfg.seed},
                     {"learning_rate", cfg.learning_rate},
                     {"train_file", a.train},
                     {"train_fingerprint", fingerprint_file(a.train)},
                     {"bounds", {{"min", bounds.min}, {"max", bounds.max}}},
                     {"label_values", labels},
                     {"best_train_loss", final_loss},
                     {"model_path", (fs::path(a.out) / "model.json").string()}};
    write_json(fs::path(a.out) / "manifest.json", manifest);
    std::cout << "best training loss " << fmt17(final_loss) << ", model saved to "
              << a.out << "\n";
    return 0;
}

LabelTable load_label_table(const fs::path& model_dir) {
    const json manifest = read_json(model_dir / "manifest.json");
    return manifest.at("label_values").get<LabelTable>();
}

struct EvalArgs {
    std::string model, test, config;
};

int cmd_eval(const EvalArgs& a) {
    TrainedArtifact art = load_artifact(a.model);
    LabelTable labels = load_label_table(a.model);
    const auto raw = load_ucr_file(a.test, labels);
    const auto images =
        encode_all(minmax_normalize(raw, art.bounds), art.config.motif_length);
    const double error = evaluate(art, images);
    std::cout << "error_rate " << fmt17(error) << "\n";
    json metrics = {{"test_file", a.test},
                    {"test_fingerprint", fingerprint_file(a.test)},
                    {"instances", images.size()},
                    {"error_rate", error}};
    write_json(fs::path(a.model) / "metrics.json", metrics);
    return 0;
}

struct ExplainArgs {
    std::string model, input, out = default_out_dir(), config;
    std::size_t class_index = 0;
    bool softmax_score = false;
};

int cmd_explain(const ExplainArgs& a) {
    TrainedArtifact art = load_artifact(a.model);
    if (a.class_index < 1 || a.class_index > art.model.classes()) {
        throw std::invalid_argument("--class-index out of range");
    }
    LabelTable labels = load_label_table(a.model);
    const auto raw = load_ucr_file(a.input, labels);
    const auto normalized = minmax_normalize(raw, art.bounds);
    const std::size_t n = art.config.motif_length;
    const CamScore score =
        a.softmax_score ? CamScore::kSoftmax : CamScore::kLogit;

    fs::create_directories(a.out);
    const fs::path out(a.out);
    json sidecar = json::array();
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        const MdfImage img = encode(normalized[i], n);
        const Grid coarse = grad_cam(art.model, img, a.class_index, score);
        const Grid up = upsample_bilinear(coarse, img.d_max(), img.width());
        const Grid sym = symmetrize(up);

        const std::string stem = "series_" + std::to_string(i);
        const auto sc1 = write_pgm16((out / (stem + "_cam_coarse.pgm")).string(), coarse);
        const auto sc2 = write_pgm16((out / (stem + "_cam_sym.pgm")).string(), sym);
        const auto sc3 = write_ppm((out / (stem + "_cam_sym.ppm")).string(), sym);
        sidecar.push_back({{"series", i},
                           {"coarse", {{"min", sc1.min}, {"max", sc1.max}}},
                           {"sym_pgm", {{"min", sc2.min}, {"max", sc2.max}}},
                           {"sym_ppm", {{"min", sc3.min}, {"max", sc3.max}}}});

        const auto sets = collect_all_indices(normalized[i], n);
        const auto scores = significance(sym, sets);
        std::ofstream csv(out / (stem + "_significance.csv"));
        if (!csv) throw std::runtime_error("cannot write significance CSV");
        csv << "pattern,count,score,rank\n";
        for (std::size_t r = 0; r < scores.size(); ++r) {
            csv << scores[r].code << "," << scores[r].count << ","
                << fmt17(scores[r].score) << "," << (r + 1) << "\n";
        }
    }
    json manifest = {{"command", "explain"},
                     {"class_index", a.class_index},
                     {"score", a.softmax_score ? "softmax" : "logit"},
                     {"input", a.input},
                     {"input_fingerprint", fingerprint_file(a.input)},
                     {"series", normalized.size()},
                     {"intensity_scales", sidecar}};
    write_json(out / "manifest.json", manifest);
    std::cout << "explained " << normalized.size() << " series to " << a.out << "\n";
    return 0;
}

struct SynthArgs {
    std::string out, config;
    std::size_t classes = 4;
    std::size_t count = 50;
    std::size_t length = 64;
    double sigma = 0.05;
    unsigned seed = 1;
};

int cmd_synth(const SynthArgs& a) {
    const auto series =
        synthesize_twopatterns(a.classes, a.count, a.length, a.sigma, a.seed);
    LabelTable labels;
    for (std::size_t c = 1; c <= a.classes; ++c) {
        labels.push_back(static_cast<double>(c));
    }
    write_ucr_file(a.out, series, labels);
    std::cout << "wrote " << series.size() << " series to " << a.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Motif difference field encoder, classifier and explainer"};
    app.require_subcommand(1);

    EncodeArgs enc;
    auto* enc_cmd = app.add_subcommand("encode", "Encode a dataset into MDF records");
    enc_cmd->add_option("--input", enc.input, "UCR flat file")->required();
    enc_cmd->add_option("--n", enc.n, "motif length (>= 2)");
    enc_cmd->add_option("--out", enc.out, "output directory");
    enc_cmd->add_flag("--channel-images", enc.channel_images,
                      "also write per-channel PGM images");
    enc_cmd->add_option("--job-config", enc.config, "JSON config file");

    TrainArgs tr;
    auto* tr_cmd = app.add_subcommand("train", "Train the FCN on MDF images");
    tr_cmd->add_option("--train", tr.train, "UCR training file")->required();
    tr_cmd->add_option("--n", tr.n, "motif length");
    tr_cmd->add_option("--filters", tr.filters, "conv filter counts a,b,c")
        ->delimiter(',');
    tr_cmd->add_option("--strides", tr.strides, "stride triple u1,u2,u3")
        ->delimiter(',');
    tr_cmd->add_flag("--cv", tr.cv, "4-fold cross-validation over stride candidates");
    tr_cmd->add_option("--epochs", tr.epochs, "training epochs");
    tr_cmd->add_option("--batch", tr.batch, "batch size");
    tr_cmd->add_option("--seed", tr.seed, "RNG seed");
    tr_cmd->add_option("--lr", tr.lr, "learning rate");
    tr_cmd->add_option("--out", tr.out, "model output directory");
    tr_cmd->add_option("--job-config", tr.config, "JSON config file");

    EvalArgs ev;
    auto* ev_cmd = app.add_subcommand("eval", "Evaluate a trained model");
    ev_cmd->add_option("--model", ev.model, "model directory")->required();
    ev_cmd->add_option("--test", ev.test, "UCR test file")->required();
    ev_cmd->add_option("--job-config", ev.config, "JSON config file");

    ExplainArgs ex;
    auto* ex_cmd = app.add_subcommand("explain", "Grad-CAM and pattern significance");
    ex_cmd->add_option("--model", ex.model, "model directory")->required();
    ex_cmd->add_option("--input", ex.input, "UCR file to explain")->required();
    ex_cmd->add_option("--class-index", ex.class_index, "1-based target class")
        ->required();
    ex_cmd->add_option("--out", ex.out, "output directory");
    ex_cmd->add_flag("--softmax-score", ex.softmax_score,
                     "take gradients from the softmax output instead of the logit");
    ex_cmd->add_option("--job-config", ex.config, "JSON config file");

    unsigned gc_seed = 1;
    auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
    gc_cmd->add_option("--seed", gc_seed, "RNG seed");

    SynthArgs sy;
    auto* sy_cmd = app.add_subcommand("synth", "Generate a synthetic plateau dataset");
    sy_cmd->add_option("--classes", sy.classes, "2 or 4");
    sy_cmd->add_option("--count", sy.count, "series per class");
    sy_cmd->add_option("--length", sy.length, "series length T (>= 32)");
    sy_cmd->add_option("--sigma", sy.sigma, "noise standard deviation");
    sy_cmd->add_option("--seed", sy.seed, "RNG seed");
    sy_cmd->add_option("--out", sy.out, "output UCR file")->required();
    sy_cmd->add_option("--job-config", sy.config, "JSON config file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (enc_cmd->parsed()) {
            apply_config_file(*enc_cmd, enc.config);
            return cmd_encode(enc);
        }
        if (tr_cmd->parsed()) {
            apply_config_file(*tr_cmd, tr.config);
            return cmd_train(tr);
        }
        if (ev_cmd->parsed()) {
            apply_config_file(*ev_cmd, ev.config);
            return cmd_eval(ev);
        }
        if (ex_cmd->parsed()) {
            apply_config_file(*ex_cmd, ex.config);
            return cmd_explain(ex);
        }
        if (gc_cmd->parsed()) {
            return report_gradcheck(std::cout, gc_seed, 20) ? 0 : 1;
        }
        if (sy_cmd->parsed()) {
            apply_config_file(*sy_cmd, sy.config);
            return cmd_synth(sy);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
