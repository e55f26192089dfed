#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tnar/manifold/chart.hpp"
#include "tnar/manifold/dataset.hpp"
#include "tnar/nn/adam.hpp"
#include "tnar/nn/mlp.hpp"
#include "tnar/train/ssl.hpp"

namespace tnar::train {

// Constant lr until lr_decay_start, then linear decay reaching 0 at total_updates.
// `step` is the 0-based update index.
double learning_rate_at(const SslConfig& cfg, std::size_t step);

// Bias-corrected Adam (beta1 0.9, beta2 0.999, eps 1e-8) at the scheduled rate.
void adam_step(nn::MlpParams& params, const nn::MlpParams& grads, nn::AdamState& state,
               std::size_t step, const SslConfig& cfg);

struct LogRecord {
    std::size_t update = 0;  // 1-based index of the update just applied
    double lr = 0.0;
    LossTerms terms;         // measured on this update's batch, before the update
    double eval_error = -1.0;  // -1 when no evaluation set was supplied

    bool operator==(const LogRecord&) const = default;
};

struct TrainReport {
    std::vector<LogRecord> records;
    std::size_t updates = 0;
    double final_eval_error = -1.0;
    double wall_seconds = 0.0;  // informational; excluded from comparisons and files

    bool operator==(const TrainReport& o) const {
        return records == o.records && updates == o.updates && final_eval_error == o.final_eval_error;
    }
};

struct TrainResult {
    nn::Mlp classifier;
    TrainReport report;
};

// Called after each logged update with the record and the updated classifier.
using TrainObserver = std::function<void(const LogRecord&, const nn::Mlp&)>;

// Samples labeled / unlabeled batches with replacement each update, minimizes
// the semi-supervised objective with Adam and logs every cfg.log_every updates.
// Throws NonFiniteLoss with the offending update index on divergence.
TrainResult train(const manifold::Dataset& data, const manifold::Chart* chart,
                  const nn::MlpSpec& spec, const SslConfig& cfg,
                  std::span<const LabeledPoint> eval_set = {}, const TrainObserver& observer = {});

// Fraction of argmax-misclassified points (ties go to the lower class index).
double evaluate(const nn::Mlp& classifier, std::span<const LabeledPoint> eval_set);

std::size_t predict(const nn::Mlp& classifier, const Vector& x);

struct BBox {
    double xmin = -1.5, xmax = 1.5, ymin = -1.5, ymax = 1.5;
};

struct GridCell {
    double x1 = 0.0;
    double x2 = 0.0;
    std::size_t cls = 0;
    double prob = 0.0;
};

// Row-major over x2 (outer) and x1 (inner), resolution x resolution points.
std::vector<GridCell> decision_boundary_grid(const nn::Mlp& classifier, const BBox& bbox,
                                             std::size_t resolution);

void write_grid_csv(std::ostream& os, const std::vector<GridCell>& grid);

// Line-delimited records of tab-separated key:value pairs; the summary record
// carries the config echo and any extra fields (e.g. input hashes).
void write_report(std::ostream& os, const TrainReport& report, const manifold::Metadata& summary);

}  // namespace tnar::train
