#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tnar/manifold/chart_training.hpp"
#include "tnar/manifold/two_rings.hpp"
#include "tnar/train/trainer.hpp"

namespace tnar::cli {

// Process exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,
    kBadFlags = 2,
    kIoError = 3,
    kDiverged = 4,
    kMissingChart = 5,
    kCheckpointMismatch = 6,
    kUnsupportedDim = 7,
};

struct GenDataArgs {
    manifold::TwoRingsConfig rings;
    std::string out;
};

struct TrainManifoldArgs {
    std::string kind = "ae";  // ae | vae
    std::size_t latent_dim = 1;
    std::string data;
    std::string out;
    std::string metrics_out;  // defaults to <out>.metrics
    std::vector<std::size_t> hidden{32, 32};
    std::string activation = "tanh";
    manifold::ChartTrainConfig optim;
};

struct TrainArgs {
    std::string method;  // overrides the config when non-empty
    std::string config;
    std::string data;
    std::string chart;  // "oracle-rings" or a chart checkpoint path
    std::string eval_data;
    std::string model_out;
    std::string report_out;
    std::vector<std::pair<std::string, std::string>> overrides;  // --set key=value
};

struct EvalArgs {
    std::string model;
    std::string data;
    std::string record_out;
};

struct BoundaryArgs {
    std::string model;
    train::BBox bbox;
    std::size_t resolution = 101;
    std::string out;
};

struct ReproArgs {
    std::size_t seeds = 5;
    std::string out_dir = "repro_two_rings";
    std::string config_dir;  // holds two_rings_{supervised,vat,tnar}.cfg
    std::size_t test_points = 2000;
    std::optional<std::size_t> total_updates;  // override for smoke runs
};

struct ReproRow {
    std::string method;
    double mean = 0.0;    // percent
    double stddev = 0.0;  // percent, sample standard deviation
    std::vector<double> errors;  // percent, one per seed
};

struct ReproSummary {
    std::vector<ReproRow> rows;
    double wall_seconds = 0.0;
};

// Each command writes its artifacts, prints a short summary to `out`, and
// returns an ExitCode; diagnostics go to `err`.
int cmd_gen_data(const GenDataArgs& args, std::ostream& out, std::ostream& err);
int cmd_train_manifold(const TrainManifoldArgs& args, std::ostream& out, std::ostream& err);
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_boundary(const BoundaryArgs& args, std::ostream& out, std::ostream& err);
int cmd_repro_two_rings(const ReproArgs& args, std::ostream& out, std::ostream& err,
                        ReproSummary* summary = nullptr);

// Default location of the shipped run configurations.
std::string default_config_dir();

void write_repro_table(std::ostream& os, const ReproSummary& summary);

}  // namespace tnar::cli
