// deepmap: command-line front end for the graph-classification pipeline.
//
// Subcommands: synth, featurize, train, cv, verify. Every command is
// deterministic for fixed flags and seeds; all randomness flows from explicit
// --seed flags. Exit codes: 0 success, 2 argument error, 3 refusal to
// overwrite, 4 missing input, 5 verification failure, 1 anything else.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <set>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "deepmap/alignment.hpp"
#include "deepmap/centrality.hpp"
#include "deepmap/cross_validation.hpp"
#include "deepmap/errors.hpp"
#include "deepmap/feature_maps.hpp"
#include "deepmap/golden.hpp"
#include "deepmap/graph.hpp"
#include "deepmap/network.hpp"
#include "deepmap/parallel.hpp"
#include "deepmap/synthetic.hpp"
#include "deepmap/tu_io.hpp"

namespace fs = std::filesystem;

namespace {

std::string default_dataset_name(const fs::path &dir) {
    fs::path p = dir;
    if (!p.has_filename())
        p = p.parent_path();
    std::string name = p.filename().string();
    if (name.empty() || name == "." || name == "..")
        throw deepmap::ArgumentError("cannot derive a dataset name from '" + dir.string() +
                                     "'; pass --name");
    return name;
}

std::ofstream open_out(const fs::path &path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out)
        throw deepmap::Error("cannot open " + path.string() + " for writing");
    return out;
}

std::string fmt_double(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// Every command that owns an output directory drops the effective settings
// there, so a run can always be reproduced from its outputs alone.
void write_effective_config(const fs::path &dir, const std::string &command,
                            const ConfigEntries &entries) {
    auto out = open_out(dir / "config.txt");
    out << "command=" << command << "\n";
    for (const auto &[key, value] : entries)
        out << key << "=" << value << "\n";
}

std::vector<int> read_labels_file(const fs::path &path) {
    if (!fs::exists(path))
        throw deepmap::MissingInputError("missing labels file: " + path.string());
    std::ifstream in(path);
    if (!in)
        throw deepmap::Error("cannot open " + path.string());
    std::vector<int> labels;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (line.empty())
            continue;
        std::istringstream row(line);
        int value = 0;
        if (!(row >> value) || !(row >> std::ws).eof())
            throw deepmap::FormatError(path.string() + ":" + std::to_string(line_no) +
                                       ": expected one integer label");
        labels.push_back(value);
    }
    return labels;
}

std::vector<deepmap::CentralityVector> dataset_centralities(const deepmap::GraphDataset &ds,
                                                            int threads) {
    std::vector<deepmap::CentralityVector> out(static_cast<std::size_t>(ds.num_graphs()));
    deepmap::parallel_for(ds.num_graphs(), threads, [&](int i) {
        out[static_cast<std::size_t>(i)] =
            deepmap::eigenvector_centrality(ds.graphs[static_cast<std::size_t>(i)]);
    });
    return out;
}

// --- synth ----------------------------------------------------------------------

struct SynthArgs {
    int graphs = 400;
    int classes = 4;
    int min_size = 20;
    int max_size = 60;
    double p = 0.2;
    std::uint64_t seed = 0;
    std::string out;
    std::string name;
    bool force = false;
    std::string config;
};

int cmd_synth(const SynthArgs &a) {
    const fs::path out_dir(a.out);
    const std::string name = a.name.empty() ? default_dataset_name(out_dir) : a.name;
    const char *suffixes[] = {"_A.txt", "_graph_indicator.txt", "_graph_labels.txt",
                              "_node_labels.txt"};
    if (!a.force)
        for (const char *suffix : suffixes) {
            const fs::path file = out_dir / (name + suffix);
            if (fs::exists(file))
                throw deepmap::RefusalError("refusing to overwrite " + file.string() +
                                            " (pass --force to allow)");
        }

    deepmap::GraphDataset ds =
        deepmap::generate_er_dataset(a.graphs, a.classes, a.min_size, a.max_size, a.p, a.seed);
    ds.name = name;
    fs::create_directories(out_dir);
    deepmap::write_tu_dataset(ds, out_dir, name);
    write_effective_config(out_dir, "synth",
                           {{"graphs", std::to_string(a.graphs)},
                            {"classes", std::to_string(a.classes)},
                            {"min_size", std::to_string(a.min_size)},
                            {"max_size", std::to_string(a.max_size)},
                            {"p", fmt_double(a.p)},
                            {"seed", std::to_string(a.seed)},
                            {"name", name},
                            {"force", a.force ? "true" : "false"}});
    std::cout << "wrote " << ds.num_graphs() << " graphs, " << ds.class_count << " classes, to "
              << out_dir.string() << " as '" << name << "'\n";
    return 0;
}

// --- featurize ------------------------------------------------------------------

struct FeaturizeArgs {
    std::string data;
    std::string name;
    std::string out;
    std::string kind = "wl";
    int h = 1;
    int k = 3;
    int q = 20;
    std::uint64_t seed = 0;
    int r = 0; // > 0: also assemble and write the aligned tensor
    int w = 0; // 0: dataset maximum vertex count
    int threads = 1;
    std::string config;
};

int cmd_featurize(const FeaturizeArgs &a) {
    const fs::path data_dir(a.data);
    const std::string name = a.name.empty() ? default_dataset_name(data_dir) : a.name;
    deepmap::GraphDataset ds = deepmap::parse_tu_dataset(data_dir, name);

    const deepmap::FeatureKind kind = deepmap::feature_kind_from_name(a.kind);
    deepmap::FeatureParams params;
    params.h = a.h;
    params.k = a.k;
    params.q = a.q;
    params.seed = a.seed;

    deepmap::WlRefinement refinement;
    const deepmap::WlRefinement *refinement_ptr = nullptr;
    deepmap::FeatureIndex index;
    if (kind == deepmap::FeatureKind::wl_subtree) {
        refinement = deepmap::wl_refine(ds.graphs, params.h);
        index = deepmap::build_wl_index(refinement, params);
        refinement_ptr = &refinement;
    } else {
        index = deepmap::build_feature_index(ds, kind, params);
    }
    const auto features = deepmap::dataset_vertex_features(ds, index, refinement_ptr, a.threads);

    const fs::path out_dir(a.out);
    fs::create_directories(out_dir);
    {
        auto out = open_out(out_dir / "index.txt");
        deepmap::write_feature_index(out, index);
    }
    {
        auto out = open_out(out_dir / "features.txt");
        for (const auto &vfm : features)
            deepmap::write_feature_matrix(out, vfm);
    }
    {
        auto out = open_out(out_dir / "labels.txt");
        for (int label : ds.class_labels)
            out << label << "\n";
    }
    if (a.r > 0) {
        const auto centralities = dataset_centralities(ds, a.threads);
        deepmap::AlignedTensor tensor =
            deepmap::assemble_input(ds, features, centralities, a.r, a.w, a.threads);
        auto out = open_out(out_dir / "tensor.bin", std::ios::out | std::ios::binary);
        deepmap::write_aligned_tensor(out, tensor);
    }
    ConfigEntries entries = {{"data", a.data},           {"name", name},
                             {"kind", a.kind},           {"seed", std::to_string(a.seed)},
                             {"r", std::to_string(a.r)}, {"w", std::to_string(a.w)}};
    if (kind == deepmap::FeatureKind::wl_subtree)
        entries.emplace_back("h", std::to_string(a.h));
    if (kind == deepmap::FeatureKind::graphlet) {
        entries.emplace_back("k", std::to_string(a.k));
        entries.emplace_back("q", std::to_string(a.q));
    }
    write_effective_config(out_dir, "featurize", entries);
    std::cout << "graphs: " << ds.num_graphs() << "\n"
              << "dimension: " << index.dimension() << "\n";
    return 0;
}

// --- train ----------------------------------------------------------------------

struct TrainArgs {
    std::string tensor;
    std::string labels;
    std::string out;
    double lr = 0.01;
    double decay = 0.5;
    int patience = 5;
    int batch = 32;
    int epochs = 100;
    int classes = 0; // 0: infer from the labels file
    std::uint64_t seed = 0;
    std::string config;
};

int cmd_train(const TrainArgs &a) {
    const fs::path tensor_path(a.tensor);
    if (!fs::exists(tensor_path))
        throw deepmap::MissingInputError("missing tensor file: " + tensor_path.string());
    deepmap::AlignedTensor tensor;
    {
        std::ifstream in(tensor_path, std::ios::binary);
        if (!in)
            throw deepmap::Error("cannot open " + tensor_path.string());
        tensor = deepmap::read_aligned_tensor(in);
    }
    const std::vector<int> labels = read_labels_file(fs::path(a.labels));
    if (static_cast<int>(labels.size()) != tensor.n)
        throw deepmap::IntegrityError("labels file has " + std::to_string(labels.size()) +
                                      " entries for a tensor of " + std::to_string(tensor.n) +
                                      " graphs");
    int class_count = a.classes;
    if (class_count == 0) {
        for (int label : labels)
            class_count = std::max(class_count, label + 1);
    }

    deepmap::ModelConfig mc;
    mc.input_dim = tensor.m;
    mc.field_size = tensor.r;
    mc.sequence_len = tensor.w;
    mc.class_count = class_count;
    deepmap::Model model = deepmap::init_model(mc, a.seed);

    deepmap::TrainConfig tc;
    tc.learning_rate = a.lr;
    tc.decay_factor = a.decay;
    tc.patience = a.patience;
    tc.batch_size = a.batch;
    tc.max_epochs = a.epochs;
    tc.seed = a.seed;
    const auto history = deepmap::train(model, tensor, labels, tc);

    const fs::path out_dir(a.out);
    fs::create_directories(out_dir);
    {
        auto out = open_out(out_dir / "model.bin", std::ios::out | std::ios::binary);
        deepmap::save_model(out, model);
    }
    {
        auto out = open_out(out_dir / "history.csv");
        deepmap::write_history_csv(out, history);
    }
    const deepmap::EpochStats last = history.empty() ? deepmap::EpochStats{} : history.back();
    {
        auto out = open_out(out_dir / "metrics.txt");
        out << "epochs: " << a.epochs << "\n";
        out << "learning_rate: " << fmt_double(a.lr) << "\n";
        out << "decay_factor: " << fmt_double(a.decay) << "\n";
        out << "patience: " << a.patience << "\n";
        out << "batch_size: " << a.batch << "\n";
        out << "seed: " << a.seed << "\n";
        out << "final_loss: " << fmt_double(last.loss) << "\n";
        out << "final_accuracy: " << fmt_double(last.accuracy) << "\n";
        out << "final_lr: " << fmt_double(last.lr) << "\n";
    }
    write_effective_config(out_dir, "train",
                           {{"tensor", a.tensor},
                            {"labels", a.labels},
                            {"lr", fmt_double(a.lr)},
                            {"decay", fmt_double(a.decay)},
                            {"patience", std::to_string(a.patience)},
                            {"batch", std::to_string(a.batch)},
                            {"epochs", std::to_string(a.epochs)},
                            {"classes", std::to_string(class_count)},
                            {"seed", std::to_string(a.seed)}});
    std::cout << "trained " << a.epochs << " epochs; final loss " << last.loss
              << ", final accuracy " << last.accuracy << "\n";
    return 0;
}

// --- cv -------------------------------------------------------------------------

struct CvArgs {
    std::string data;
    std::string name;
    std::string out;
    std::string pipeline = "deepmap";
    std::string kind = "wl";
    int h = 1;
    int k = 3;
    int q = 20;
    std::uint64_t sample_seed = 0;
    int r = 5;
    int w = 0;
    int folds = 10;
    std::uint64_t seed = 0;
    double lr = 0.01;
    double decay = 0.5;
    int patience = 5;
    int batch = 32;
    int epochs = 30;
    double l2 = 1e-4;
    int logreg_epochs = 300;
    double logreg_lr = 1.0;
    int threads = 1;
    std::string config;
};

int cmd_cv(const CvArgs &a) {
    const auto start = std::chrono::steady_clock::now();
    const fs::path data_dir(a.data);
    const std::string name = a.name.empty() ? default_dataset_name(data_dir) : a.name;
    deepmap::GraphDataset ds = deepmap::parse_tu_dataset(data_dir, name);

    deepmap::CvConfig config;
    config.pipeline = deepmap::pipeline_from_name(a.pipeline);
    config.kind = deepmap::feature_kind_from_name(a.kind);
    config.params.h = a.h;
    config.params.k = a.k;
    config.params.q = a.q;
    config.params.seed = a.sample_seed;
    config.folds = a.folds;
    config.seed = a.seed;
    config.threads = a.threads;
    config.field_size = a.r;
    config.width = a.w;
    config.train.learning_rate = a.lr;
    config.train.decay_factor = a.decay;
    config.train.patience = a.patience;
    config.train.batch_size = a.batch;
    config.train.max_epochs = a.epochs;
    config.logreg_l2 = a.l2;
    config.logreg_epochs = a.logreg_epochs;
    config.logreg_lr = a.logreg_lr;

    const deepmap::CvResult result = deepmap::cross_validate(ds, config);

    const fs::path out_dir(a.out);
    fs::create_directories(out_dir);
    {
        auto out = open_out(out_dir / "report.txt");
        deepmap::write_cv_report_text(out, config, result);
    }
    {
        auto out = open_out(out_dir / "folds.csv");
        deepmap::write_cv_folds_csv(out, result);
    }
    if (config.pipeline == deepmap::PipelineKind::deepmap) {
        auto out = open_out(out_dir / "epochs.csv");
        deepmap::write_cv_epochs_csv(out, result);
    }
    ConfigEntries entries = {{"data", a.data},
                             {"name", name},
                             {"pipeline", a.pipeline},
                             {"kind", a.kind},
                             {"folds", std::to_string(a.folds)},
                             {"seed", std::to_string(a.seed)},
                             {"threads", std::to_string(a.threads)}};
    if (config.kind == deepmap::FeatureKind::wl_subtree)
        entries.emplace_back("h", std::to_string(a.h));
    if (config.kind == deepmap::FeatureKind::graphlet) {
        entries.emplace_back("k", std::to_string(a.k));
        entries.emplace_back("q", std::to_string(a.q));
        entries.emplace_back("sample_seed", std::to_string(a.sample_seed));
    }
    if (config.pipeline == deepmap::PipelineKind::deepmap) {
        entries.emplace_back("r", std::to_string(a.r));
        entries.emplace_back("w", std::to_string(a.w));
        entries.emplace_back("lr", fmt_double(a.lr));
        entries.emplace_back("decay", fmt_double(a.decay));
        entries.emplace_back("patience", std::to_string(a.patience));
        entries.emplace_back("batch", std::to_string(a.batch));
        entries.emplace_back("epochs", std::to_string(a.epochs));
    } else {
        entries.emplace_back("l2", fmt_double(a.l2));
        entries.emplace_back("logreg_epochs", std::to_string(a.logreg_epochs));
        entries.emplace_back("logreg_lr", fmt_double(a.logreg_lr));
    }
    write_effective_config(out_dir, "cv", entries);

    // Wall time goes to stdout only; the report files stay byte-reproducible.
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    std::cout << "mean_accuracy: " << result.mean_accuracy << "\n"
              << "stddev_accuracy: " << result.stddev_accuracy << "\n";
    if (config.pipeline == deepmap::PipelineKind::deepmap)
        std::cout << "best_epoch: " << result.best_epoch << "\n";
    std::cout << "wall_seconds: " << elapsed.count() << "\n";
    return 0;
}

// --- verify ---------------------------------------------------------------------

struct VerifyArgs {
    std::string only;
    std::string corrupt; // self-test hook: perturb one check's fixture
};

int cmd_verify(const VerifyArgs &a) {
    const auto checks = deepmap::run_verify_checks(a.only, a.corrupt);
    bool all_passed = true;
    for (const auto &check : checks) {
        std::cout << (check.passed ? "PASS " : "FAIL ") << check.name << ": " << check.detail
                  << "\n";
        all_passed = all_passed && check.passed;
    }
    if (!all_passed) {
        std::cerr << "verification failed\n";
        return 5;
    }
    return 0;
}

// add_subcommand plus a long-only help flag: several subcommands have a
// single-letter option (--h), which would collide with the default -h alias.
CLI::App *add_command(CLI::App &app, const std::string &name, const std::string &description) {
    CLI::App *cmd = app.add_subcommand(name, description);
    cmd->set_help_flag("--help", "Print this help message and exit");
    return cmd;
}

// Flat key=value configuration support. File entries become long options
// appended to the argument list, skipping any key the command line already
// sets — so flags override file values and file values override defaults.
// Underscores in keys are accepted as dashes; the provenance keys written by
// write_effective_config ("command", "config") are ignored, which makes a
// previous run's config.txt directly replayable.
std::vector<std::string> merge_config_file(std::vector<std::string> args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            config_path = args[i].substr(9);
    }
    if (config_path.empty())
        return args;
    if (!fs::exists(config_path))
        throw deepmap::MissingInputError("missing config file: " + config_path);
    std::ifstream in(config_path);
    if (!in)
        throw deepmap::Error("cannot open " + config_path);

    const auto normalize = [](std::string s) {
        for (char &c : s)
            if (c == '_')
                c = '-';
        return s;
    };
    const auto trim = [](std::string s) {
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
            s.pop_back();
        std::size_t start = 0;
        while (start < s.size() && (s[start] == ' ' || s[start] == '\t'))
            ++start;
        return s.substr(start);
    };

    std::set<std::string> given;
    for (const std::string &arg : args)
        if (arg.rfind("--", 0) == 0) {
            const std::string body = arg.substr(2);
            const auto eq = body.find('=');
            given.insert(normalize(eq == std::string::npos ? body : body.substr(0, eq)));
        }

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw deepmap::FormatError(config_path + ":" + std::to_string(line_no) +
                                       ": expected key=value");
        const std::string key = normalize(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw deepmap::FormatError(config_path + ":" + std::to_string(line_no) +
                                       ": empty key");
        if (key == "command" || key == "config")
            continue;
        if (given.count(key))
            continue;
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Graph classification via aligned vertex feature maps and a 1-D CNN"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto *synth_cmd = add_command(app, "synth", "Generate a synthetic labeled graph dataset");
    synth_cmd->add_option("--config", synth.config,
                         "Flat key=value configuration file (flags override file values)");
    synth_cmd->add_option("--graphs", synth.graphs, "Number of graphs")->capture_default_str();
    synth_cmd->add_option("--classes", synth.classes, "Number of classes")->capture_default_str();
    synth_cmd->add_option("--min-size", synth.min_size, "Minimum vertex count")
        ->capture_default_str();
    synth_cmd->add_option("--max-size", synth.max_size, "Maximum vertex count")
        ->capture_default_str();
    synth_cmd->add_option("--p", synth.p, "Edge probability")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();
    synth_cmd->add_option("--name", synth.name, "Dataset name (default: output basename)");
    synth_cmd->add_flag("--force", synth.force, "Overwrite existing dataset files");

    FeaturizeArgs feat;
    auto *feat_cmd =
        add_command(app, "featurize", "Compute vertex feature maps for a dataset");
    feat_cmd->add_option("--config", feat.config,
                         "Flat key=value configuration file (flags override file values)");
    feat_cmd->add_option("--data", feat.data, "Dataset directory")->required();
    feat_cmd->add_option("--name", feat.name, "Dataset name (default: directory basename)");
    feat_cmd->add_option("--out", feat.out, "Output directory")->required();
    feat_cmd->add_option("--kind", feat.kind, "Feature kind: wl, sp, or gk")
        ->capture_default_str();
    feat_cmd->add_option("--h", feat.h, "Refinement iterations (wl)")->capture_default_str();
    feat_cmd->add_option("--k", feat.k, "Subgraph size (gk)")->capture_default_str();
    feat_cmd->add_option("--q", feat.q, "Samples per vertex (gk)")->capture_default_str();
    feat_cmd->add_option("--seed", feat.seed, "Sampling seed (gk)")->capture_default_str();
    feat_cmd->add_option("--r", feat.r, "Also write the aligned tensor for this field size")
        ->capture_default_str();
    feat_cmd->add_option("--w", feat.w, "Sequence width (0 = dataset maximum)")
        ->capture_default_str();
    feat_cmd->add_option("--threads", feat.threads, "Worker thread cap")->capture_default_str();

    TrainArgs train;
    auto *train_cmd = add_command(app, "train", "Train the network on an aligned tensor");
    train_cmd->add_option("--config", train.config,
                         "Flat key=value configuration file (flags override file values)");
    train_cmd->add_option("--tensor", train.tensor, "Aligned tensor file")->required();
    train_cmd->add_option("--labels", train.labels, "Class labels file (one per line)")
        ->required();
    train_cmd->add_option("--out", train.out, "Output directory")->required();
    train_cmd->add_option("--lr", train.lr, "Initial learning rate")->capture_default_str();
    train_cmd->add_option("--decay", train.decay, "Plateau decay factor")->capture_default_str();
    train_cmd->add_option("--patience", train.patience, "Plateau patience, in epochs")
        ->capture_default_str();
    train_cmd->add_option("--batch", train.batch, "Mini-batch size")->capture_default_str();
    train_cmd->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
    train_cmd->add_option("--classes", train.classes, "Class count (0 = infer from labels)")
        ->capture_default_str();
    train_cmd->add_option("--seed", train.seed, "Initialization/shuffle seed")
        ->capture_default_str();

    CvArgs cv;
    auto *cv_cmd = add_command(app, "cv", "Stratified k-fold cross-validation");
    cv_cmd->add_option("--config", cv.config,
                         "Flat key=value configuration file (flags override file values)");
    cv_cmd->add_option("--data", cv.data, "Dataset directory")->required();
    cv_cmd->add_option("--name", cv.name, "Dataset name (default: directory basename)");
    cv_cmd->add_option("--out", cv.out, "Output directory")->required();
    cv_cmd->add_option("--pipeline", cv.pipeline, "Pipeline: deepmap or kernel")
        ->capture_default_str();
    cv_cmd->add_option("--kind", cv.kind, "Feature kind: wl, sp, or gk")->capture_default_str();
    cv_cmd->add_option("--h", cv.h, "Refinement iterations (wl)")->capture_default_str();
    cv_cmd->add_option("--k", cv.k, "Subgraph size (gk)")->capture_default_str();
    cv_cmd->add_option("--q", cv.q, "Samples per vertex (gk)")->capture_default_str();
    cv_cmd->add_option("--sample-seed", cv.sample_seed, "Sampling seed (gk)")
        ->capture_default_str();
    cv_cmd->add_option("--r", cv.r, "Receptive field size (deepmap)")->capture_default_str();
    cv_cmd->add_option("--w", cv.w, "Sequence width (0 = dataset maximum)")
        ->capture_default_str();
    cv_cmd->add_option("--folds", cv.folds, "Number of folds")->capture_default_str();
    cv_cmd->add_option("--seed", cv.seed, "Cross-validation seed")->capture_default_str();
    cv_cmd->add_option("--lr", cv.lr, "Initial learning rate (deepmap)")->capture_default_str();
    cv_cmd->add_option("--decay", cv.decay, "Plateau decay factor (deepmap)")
        ->capture_default_str();
    cv_cmd->add_option("--patience", cv.patience, "Plateau patience (deepmap)")
        ->capture_default_str();
    cv_cmd->add_option("--batch", cv.batch, "Mini-batch size (deepmap)")->capture_default_str();
    cv_cmd->add_option("--epochs", cv.epochs, "Training epochs per fold (deepmap)")
        ->capture_default_str();
    cv_cmd->add_option("--l2", cv.l2, "L2 strength (kernel)")->capture_default_str();
    cv_cmd->add_option("--logreg-epochs", cv.logreg_epochs, "Classifier epochs (kernel)")
        ->capture_default_str();
    cv_cmd->add_option("--logreg-lr", cv.logreg_lr, "Classifier learning rate (kernel)")
        ->capture_default_str();
    cv_cmd->add_option("--threads", cv.threads, "Worker thread cap")->capture_default_str();

    VerifyArgs verify;
    auto *verify_cmd =
        add_command(app, "verify", "Check the built-in worked examples and gradients");
    verify_cmd->add_option("--only", verify.only,
                           "Run a single check: centrality, fields, wl, or grad");
    verify_cmd->add_option("--corrupt", verify.corrupt,
                           "Self-test: perturb the named check's fixture so it must fail");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = merge_config_file(std::move(args));
        std::reverse(args.begin(), args.end()); // CLI11 consumes a reversed vector
        app.parse(std::move(args));
        if (synth_cmd->parsed())
            return cmd_synth(synth);
        if (feat_cmd->parsed())
            return cmd_featurize(feat);
        if (train_cmd->parsed())
            return cmd_train(train);
        if (cv_cmd->parsed())
            return cmd_cv(cv);
        if (verify_cmd->parsed())
            return cmd_verify(verify);
        return 2; // unreachable: require_subcommand(1)
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const deepmap::ArgumentError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const deepmap::RefusalError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const deepmap::MissingInputError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
