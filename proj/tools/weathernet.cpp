// Command-line front end: fixture generation, training, evaluation, and
// fused scene prediction.
//
// Exit codes: 0 success, 1 usage error, 2 input or data error, 3 numeric
// failure during training.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <streambuf>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wnet/classifier.hpp"
#include "wnet/common.hpp"
#include "wnet/dataset.hpp"
#include "wnet/fixtures.hpp"
#include "wnet/image.hpp"
#include "wnet/metrics.hpp"
#include "wnet/predict.hpp"
#include "wnet/serialize.hpp"
#include "wnet/train.hpp"

namespace fs = std::filesystem;

namespace {

// Mirrors writes to two buffers so epoch rows can stream to stdout and a
// log file at once.
class TeeBuf : public std::streambuf {
public:
    TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

protected:
    int overflow(int ch) override {
        if (traits_type::eq_int_type(ch, traits_type::eof())) return traits_type::not_eof(ch);
        const char c = traits_type::to_char_type(ch);
        const bool ok = a_->sputc(c) != traits_type::eof() && b_->sputc(c) != traits_type::eof();
        return ok ? ch : traits_type::eof();
    }
    int sync() override { return (a_->pubsync() == 0 && b_->pubsync() == 0) ? 0 : -1; }

private:
    std::streambuf* a_;
    std::streambuf* b_;
};

struct FixturesArgs {
    std::string out;
    wnet::i64 count = 50;
    wnet::u64 seed = 0;
    wnet::i64 size = 32;
};

struct TrainArgs {
    std::string task;
    std::string data;
    std::string out;
    std::string log_path;
    wnet::i64 epochs = -1;
    wnet::i64 batch = 32;
    double lr = 1e-3;
    wnet::u64 seed = 0;
    wnet::i64 input_size = 0;
    bool desk_scale = false;
    bool no_augment = false;
    bool train_backbone = false;
};

struct EvalArgs {
    std::string model;
    std::string data;
    std::string out;
    wnet::i64 batch = 32;
};

struct PredictArgs {
    std::vector<std::string> models;
    std::string path;
    std::string out;
};

// Fixture trees nest class directories under a per-task directory; accept
// either the task directory itself or its parent.
std::string resolve_data_root(const std::string& root, const wnet::ClassifierSpec& spec) {
    const fs::path task_dir = fs::path(root) / spec.task;
    std::error_code ec;
    for (const std::string& cls : spec.classes) {
        if (!fs::is_directory(task_dir / cls, ec)) return root;
    }
    return task_dir.string();
}

void open_output_file(std::ofstream& stream, const std::string& path) {
    stream.open(path, std::ios::binary);
    if (!stream) {
        throw wnet::DataError("cannot open output file: " + path);
    }
}

int run_fixtures(const FixturesArgs& args) {
    std::cerr << "config: command=fixtures out=" << args.out << " count=" << args.count
              << " seed=" << args.seed << " size=" << args.size << "\n";
    wnet::generate_fixtures(args.out, args.count, args.seed, args.size);
    wnet::i64 classes = 0;
    for (const std::string& task : wnet::task_names()) {
        classes += static_cast<wnet::i64>(wnet::spec_for_task(task).classes.size());
    }
    std::cerr << "fixtures: wrote " << classes * args.count << " images (" << classes
              << " classes x " << args.count << ") under " << args.out << "\n";
    return 0;
}

int run_train(const TrainArgs& args) {
    const wnet::ClassifierSpec spec = wnet::spec_for_task(args.task);
    const wnet::i64 input_size = args.input_size != 0 ? args.input_size
                                 : args.desk_scale    ? 32
                                                      : 224;
    const wnet::i64 epochs = args.epochs >= 0 ? args.epochs : args.desk_scale ? 30 : 100;

    wnet::TrainConfig config;
    config.epochs = epochs;
    config.batch_size = args.batch;
    config.lr = static_cast<float>(args.lr);
    config.seed = args.seed;
    config.augment = !args.no_augment;

    const std::string data_root = resolve_data_root(args.data, spec);
    std::cerr << "config: command=train task=" << args.task << " model=" << spec.name
              << " data=" << data_root << " out=" << args.out << " epochs=" << config.epochs
              << " batch=" << config.batch_size << " lr=" << config.lr << " seed=" << config.seed
              << " input_size=" << input_size << " augment=" << (config.augment ? "on" : "off")
              << " freeze_backbone=" << (args.train_backbone ? "off" : "on") << "\n";

    wnet::DatasetManifest manifest = wnet::load_dataset(data_root, spec.task, spec.classes);
    wnet::split_manifest(manifest, 0.8, args.seed);
    std::cerr << "data: " << manifest.samples.size() << " samples, "
              << manifest.split_count(wnet::SplitKind::train) << " train / "
              << manifest.split_count(wnet::SplitKind::test) << " test\n";

    wnet::Classifier<float> model(spec, wnet::BackboneConfig::for_input(input_size),
                                  !args.train_backbone, args.seed);

    std::ofstream log_file;
    std::optional<TeeBuf> tee;
    std::ostream log_stream(std::cout.rdbuf());
    if (!args.log_path.empty()) {
        open_output_file(log_file, args.log_path);
        tee.emplace(std::cout.rdbuf(), log_file.rdbuf());
        log_stream.rdbuf(&*tee);
    }

    wnet::train_classifier(model, manifest, config, &log_stream);
    log_stream.flush();

    wnet::save_model(model, args.out);
    std::cerr << "model: saved to " << args.out << "\n";
    return 0;
}

int run_eval(const EvalArgs& args) {
    std::cerr << "config: command=eval model=" << args.model << " data=" << args.data
              << " batch=" << args.batch << "\n";
    wnet::Classifier<float> model = wnet::load_model(args.model);
    const std::string data_root = resolve_data_root(args.data, model.spec());
    wnet::DatasetManifest manifest =
        wnet::load_dataset(data_root, model.spec().task, model.spec().classes);
    const wnet::MetricsReport report =
        wnet::evaluate_classifier(model, manifest, wnet::SplitKind::train, args.batch);
    const std::string text = wnet::report_text(report);
    std::cout << text;
    if (!args.out.empty()) {
        std::ofstream out;
        open_output_file(out, args.out);
        out << text;
    }
    return 0;
}

nlohmann::ordered_json label_record(const std::string& path, const wnet::SceneLabel& label) {
    nlohmann::ordered_json rec;
    rec["path"] = path;
    rec["time"] = label.time;
    rec["glare"] = label.glare;
    rec["precipitation"] = label.precipitation;
    rec["fog"] = label.fog;
    rec["night_conf"] = label.night_conf;
    rec["glare_conf"] = label.glare_conf;
    rec["precip_conf"] = label.precip_conf;
    rec["fog_conf"] = label.fog_conf;
    rec["describe"] = wnet::describe(label);
    return rec;
}

std::vector<std::string> collect_image_paths(const std::string& root) {
    std::vector<std::string> paths;
    if (fs::is_directory(root)) {
        for (const fs::directory_entry& entry : fs::recursive_directory_iterator(root)) {
            if (entry.is_regular_file()) paths.push_back(entry.path().string());
        }
        std::sort(paths.begin(), paths.end());
        if (paths.empty()) {
            throw wnet::DataError("no files under directory: " + root);
        }
    } else if (fs::is_regular_file(root)) {
        paths.push_back(root);
    } else {
        throw wnet::DataError("no such file or directory: " + root);
    }
    return paths;
}

int run_predict(const PredictArgs& args) {
    std::cerr << "config: command=predict models=" << args.models[0] << "," << args.models[1]
              << "," << args.models[2] << "," << args.models[3] << " path=" << args.path << "\n";
    wnet::ScenePredictor predictor(
        wnet::load_model(args.models[0]), wnet::load_model(args.models[1]),
        wnet::load_model(args.models[2]), wnet::load_model(args.models[3]));

    std::ofstream out_file;
    if (!args.out.empty()) open_output_file(out_file, args.out);

    const std::vector<std::string> paths = collect_image_paths(args.path);
    wnet::i64 ok = 0;
    for (const std::string& path : paths) {
        nlohmann::ordered_json rec;
        try {
            const wnet::Image img = wnet::load_image(path);
            rec = label_record(path, predictor.predict(img));
            ++ok;
        } catch (const wnet::DataError& e) {
            rec["path"] = path;
            rec["error"] = e.what();
        }
        const std::string line = rec.dump();
        std::cout << line << "\n";
        if (out_file.is_open()) out_file << line << "\n";
    }
    if (ok == 0) {
        std::cerr << "error: no image under " << args.path << " could be decoded\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Road-scene weather classification: four residual CNN heads fused into one "
                 "scene label"};
    app.require_subcommand(1);

    FixturesArgs fx;
    CLI::App* fixtures = app.add_subcommand(
        "fixtures", "Generate a synthetic striped-tile dataset for all four tasks");
    fixtures->add_option("--out", fx.out, "Output directory root")->required();
    fixtures->add_option("--count", fx.count, "Images per class")
        ->default_val(50)
        ->check(CLI::PositiveNumber);
    fixtures->add_option("--seed", fx.seed, "Generator seed")->default_val(0);
    fixtures->add_option("--size", fx.size, "Square image size in pixels")
        ->default_val(32)
        ->check(CLI::PositiveNumber);

    TrainArgs tr;
    CLI::App* train = app.add_subcommand("train", "Train one classification head");
    train->add_option("--task", tr.task, "Head to train")
        ->required()
        ->check(CLI::IsMember(wnet::task_names()));
    train->add_option("--data", tr.data, "Dataset root (class directories, or their parent)")
        ->required();
    train->add_option("--out", tr.out, "Model file to write")->required();
    train->add_option("--epochs", tr.epochs, "Training epochs (default 100, or 30 desk-scale)")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--batch", tr.batch, "Batch size")->default_val(32)->check(
        CLI::PositiveNumber);
    train->add_option("--lr", tr.lr, "Adam learning rate")->default_val(1e-3);
    train->add_option("--seed", tr.seed, "Run seed (split, init, shuffling, augmentation)")
        ->default_val(0);
    train->add_option("--input-size", tr.input_size, "Model input size")
        ->check(CLI::IsMember({32, 224}));
    train->add_flag("--desk-scale", tr.desk_scale,
                    "Desk-scale defaults: 32x32 input, mini backbone, 30 epochs");
    train->add_flag("--no-augment", tr.no_augment, "Disable training-time augmentation");
    train->add_flag("--train-backbone", tr.train_backbone,
                    "Also update backbone weights (default: backbone frozen, head only)");
    train->add_option("--log", tr.log_path, "Also write the epoch CSV to this file");

    EvalArgs ev;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate a model over every image in a dataset");
    eval->add_option("--model", ev.model, "Model file")->required();
    eval->add_option("--data", ev.data, "Dataset root (class directories, or their parent)")
        ->required();
    eval->add_option("--out", ev.out, "Also write the report to this file");
    eval->add_option("--batch", ev.batch, "Batch size")->default_val(32)->check(
        CLI::PositiveNumber);

    PredictArgs pr;
    CLI::App* predict = app.add_subcommand(
        "predict", "Run all four heads on an image or directory, one JSON record per line");
    predict->add_option("--models", pr.models,
                        "Four model files: night,glare,precip,fog")
        ->required()
        ->delimiter(',')
        ->expected(4);
    predict->add_option("path", pr.path, "Image file or directory")->required();
    predict->add_option("--out", pr.out, "Also write the records to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (fixtures->parsed()) return run_fixtures(fx);
        if (train->parsed()) return run_train(tr);
        if (eval->parsed()) return run_eval(ev);
        if (predict->parsed()) return run_predict(pr);
    } catch (const wnet::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const wnet::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
