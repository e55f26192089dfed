#include "tnar/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "tnar/errors.hpp"
#include "tnar/nn/prob.hpp"
#include "tnar/util/format.hpp"

namespace tnar::train {

double learning_rate_at(const SslConfig& cfg, std::size_t step) {
    if (step >= cfg.total_updates) return 0.0;
    if (step < cfg.lr_decay_start) return cfg.lr;
    const double span = static_cast<double>(cfg.total_updates - cfg.lr_decay_start);
    return cfg.lr * static_cast<double>(cfg.total_updates - step) / span;
}

void adam_step(nn::MlpParams& params, const nn::MlpParams& grads, nn::AdamState& state,
               std::size_t step, const SslConfig& cfg) {
    Vector flat = params.flatten();
    nn::adam_update(flat, grads.flatten(), state, learning_rate_at(cfg, step));
    params.assign_flat(flat);
}

std::size_t predict(const nn::Mlp& classifier, const Vector& x) {
    return nn::softmax(nn::forward(classifier, x)).argmax();
}

double evaluate(const nn::Mlp& classifier, std::span<const LabeledPoint> eval_set) {
    if (eval_set.empty()) throw EmptySet("evaluate: empty evaluation set");
    const auto n = static_cast<long long>(eval_set.size());
    long long errors = 0;
#pragma omp parallel for reduction(+ : errors) schedule(static)
    for (long long i = 0; i < n; ++i) {
        const auto& p = eval_set[static_cast<std::size_t>(i)];
        if (predict(classifier, p.x) != p.label) ++errors;
    }
    return static_cast<double>(errors) / static_cast<double>(n);
}

TrainResult train(const manifold::Dataset& data, const manifold::Chart* chart,
                  const nn::MlpSpec& spec, const SslConfig& cfg,
                  std::span<const LabeledPoint> eval_set, const TrainObserver& observer) {
    cfg.validate();
    data.validate();
    spec.validate();
    if (data.labeled.empty()) throw EmptySet("train: no labeled data");
    if (spec.input_dim() != data.dim) throw DimensionMismatch("train: network input != data dim");
    if (spec.output_dim() != data.num_classes) {
        throw DimensionMismatch("train: network output != number of classes");
    }
    if (cfg.needs_chart() && !chart) {
        throw MissingChart("method '" + method_name(cfg.method) + "' requires a manifold chart");
    }
    const auto t0 = std::chrono::steady_clock::now();

    numkit::Rng master(cfg.seed);
    numkit::Rng init_rng = master.split(0);
    numkit::Rng sampler = master.split(1);
    TrainResult out{nn::Mlp::initialized(spec, init_rng), {}};
    nn::AdamState adam(out.classifier.params.num_params());

    std::vector<LabeledPoint> batch_l(cfg.labeled_batch);
    std::vector<Vector> batch_ul;
    const bool have_ul = !data.unlabeled.empty();
    if (have_ul) batch_ul.resize(cfg.unlabeled_batch);

    for (std::size_t step = 0; step < cfg.total_updates; ++step) {
        for (auto& p : batch_l) p = data.labeled[sampler.uniform_index(data.labeled.size())];
        for (auto& x : batch_ul) x = data.unlabeled[sampler.uniform_index(data.unlabeled.size())];
        const std::uint64_t step_seed = sampler.next_u64();

        BatchLoss loss;
        try {
            loss = ssl_loss(out.classifier, batch_l, batch_ul, chart, cfg, step_seed);
        } catch (const NonFiniteValue& e) {
            throw NonFiniteLoss(std::string("train: ") + e.what(), step + 1);
        }
        if (!std::isfinite(loss.terms.total) || !loss.grad.all_finite()) {
            throw NonFiniteLoss("train: loss diverged", step + 1);
        }
        const double lr = learning_rate_at(cfg, step);
        adam_step(out.classifier.params, loss.grad, adam, step, cfg);

        const std::size_t update = step + 1;
        if (cfg.log_every && (update % cfg.log_every == 0 || update == cfg.total_updates)) {
            LogRecord rec{update, lr, loss.terms, -1.0};
            if (!eval_set.empty()) rec.eval_error = evaluate(out.classifier, eval_set);
            out.report.records.push_back(rec);
            if (observer) observer(rec, out.classifier);
        }
    }
    out.report.updates = cfg.total_updates;
    if (!eval_set.empty()) out.report.final_eval_error = evaluate(out.classifier, eval_set);
    out.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::vector<GridCell> decision_boundary_grid(const nn::Mlp& classifier, const BBox& bbox,
                                             std::size_t resolution) {
    if (classifier.spec.input_dim() != 2) {
        throw UnsupportedDim("decision_boundary_grid: classifier input dimension is " +
                             std::to_string(classifier.spec.input_dim()) + ", need 2");
    }
    if (resolution < 2) throw std::invalid_argument("decision_boundary_grid: resolution < 2");
    std::vector<GridCell> grid(resolution * resolution);
    const double step_x = (bbox.xmax - bbox.xmin) / static_cast<double>(resolution - 1);
    const double step_y = (bbox.ymax - bbox.ymin) / static_cast<double>(resolution - 1);
    const auto n = static_cast<long long>(grid.size());
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        const std::size_t row = idx / resolution;
        const std::size_t col = idx % resolution;
        GridCell& c = grid[idx];
        c.x1 = bbox.xmin + step_x * static_cast<double>(col);
        c.x2 = bbox.ymin + step_y * static_cast<double>(row);
        const nn::ProbVec p = nn::softmax(nn::forward(classifier, Vector{c.x1, c.x2}));
        c.cls = p.argmax();
        c.prob = p[c.cls];
    }
    return grid;
}

void write_grid_csv(std::ostream& os, const std::vector<GridCell>& grid) {
    os << "x1,x2,class,prob\n";
    for (const auto& c : grid) {
        os << util::format_double(c.x1) << ',' << util::format_double(c.x2) << ',' << c.cls << ','
           << util::format_double(c.prob) << '\n';
    }
}

void write_report(std::ostream& os, const TrainReport& report, const manifold::Metadata& summary) {
    auto num = [](double v) { return util::format_double(v); };
    for (const auto& r : report.records) {
        os << "record:log\tupdate:" << r.update << "\tlr:" << num(r.lr)
           << "\tsupervised:" << num(r.terms.supervised) << "\tr_tangent:" << num(r.terms.r_tangent)
           << "\tr_normal:" << num(r.terms.r_normal) << "\tr_entropy:" << num(r.terms.r_entropy)
           << "\tr_vat:" << num(r.terms.r_vat) << "\ttotal:" << num(r.terms.total)
           << "\teval_error:" << (r.eval_error < 0 ? std::string("na") : num(r.eval_error)) << '\n';
    }
    os << "record:summary\tupdates:" << report.updates << "\tfinal_eval_error:"
       << (report.final_eval_error < 0 ? std::string("na") : num(report.final_eval_error));
    for (const auto& [k, v] : summary) os << '\t' << k << ':' << v;
    os << '\n';
}

}  // namespace tnar::train
