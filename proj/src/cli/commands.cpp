#include "tnar/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "tnar/cli/run_config.hpp"
#include "tnar/errors.hpp"
#include "tnar/manifold/chart.hpp"
#include "tnar/manifold/dataset.hpp"
#include "tnar/util/format.hpp"
#include "tnar/util/hash.hpp"

#ifndef TNAR_DEFAULT_CONFIG_DIR
#define TNAR_DEFAULT_CONFIG_DIR "configs"
#endif

namespace tnar::cli {

namespace fs = std::filesystem;

namespace {

// Checkpoint could not be matched to the data it is applied to.
class CheckpointMismatch : public Error {
public:
    using Error::Error;
};

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kBadFlags;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kBadFlags;
    } catch (const std::ios_base::failure& e) {
        err << "io error: " << e.what() << '\n';
        return kIoError;
    } catch (const NonFiniteLoss& e) {
        err << "diverged: " << e.what() << '\n';
        return kDiverged;
    } catch (const MissingChart& e) {
        err << "error: " << e.what() << '\n';
        return kMissingChart;
    } catch (const CheckpointMismatch& e) {
        err << "checkpoint mismatch: " << e.what() << '\n';
        return kCheckpointMismatch;
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << '\n';
        return kCheckpointMismatch;
    } catch (const UnsupportedDim& e) {
        err << "unsupported: " << e.what() << '\n';
        return kUnsupportedDim;
    } catch (const NonFiniteValue& e) {
        err << "diverged: " << e.what() << '\n';
        return kDiverged;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kBadFlags;
    }
}

std::ofstream open_out(const std::string& path) {
    if (path.empty()) throw std::invalid_argument("missing output path");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::ios_base::failure("cannot write '" + path + "'");
    return os;
}

void close_checked(std::ofstream& os, const std::string& path) {
    os.close();
    if (!os) throw std::ios_base::failure("write failed for '" + path + "'");
}

manifold::Dataset load_dataset(const std::string& path) {
    if (path.empty()) throw std::invalid_argument("missing dataset path (--data)");
    return manifold::load_csv(path);
}

void write_comment_block(std::ostream& os, const manifold::Metadata& meta) {
    for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
}

nn::Mlp load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open model '" + path + "'");
    return nn::read_checkpoint(in);
}

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
    return buf;
}

double radius_from(const manifold::Dataset& data, const char* key, double fallback) {
    const std::string* v = data.find_meta(key);
    return v ? util::parse_double(*v) : fallback;
}

struct ResolvedChart {
    std::shared_ptr<const manifold::Chart> chart;
    std::string label;  // "oracle-rings" or the checkpoint hash
};

ResolvedChart resolve_chart(const std::string& spec, const manifold::Dataset& data,
                            const RunConfig& cfg) {
    if (spec.empty()) return {};
    if (spec == "oracle-rings") {
        const double inner = radius_from(data, "radius_inner", cfg.rings.radius_inner);
        const double outer = radius_from(data, "radius_outer", cfg.rings.radius_outer);
        return {std::make_shared<manifold::OracleRingsChart>(inner, outer), "oracle-rings"};
    }
    std::ifstream in(spec);
    if (!in) throw std::ios_base::failure("cannot open chart '" + spec + "'");
    auto chart = manifold::read_chart(in);
    if (chart->ambient_dim() != data.dim) {
        throw CheckpointMismatch("chart ambient dimension does not match the data");
    }
    return {chart, util::file_git_hash(spec)};
}

}  // namespace

std::string default_config_dir() { return TNAR_DEFAULT_CONFIG_DIR; }

int cmd_gen_data(const GenDataArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        const manifold::Dataset data = manifold::gen_two_rings(args.rings);
        auto os = open_out(args.out);
        manifold::write_csv(os, data);
        close_checked(os, args.out);
        out << "wrote " << data.labeled.size() + data.unlabeled.size() << " rows ("
            << data.labeled.size() << " labeled, " << data.unlabeled.size() << " unlabeled) to "
            << args.out << '\n';
        return kOk;
    });
}

int cmd_train_manifold(const TrainManifoldArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (args.kind != "ae" && args.kind != "vae") {
            throw std::invalid_argument("--kind must be ae or vae");
        }
        if (args.latent_dim == 0) throw std::invalid_argument("--latent-dim must be positive");
        const manifold::Dataset data = load_dataset(args.data);
        const std::string data_hash = util::file_git_hash(args.data);
        const nn::Activation act = nn::Activation::parse(args.activation);
        const bool vae = args.kind == "vae";
        const auto enc = nn::MlpSpec::uniform(data.dim, args.hidden,
                                              vae ? 2 * args.latent_dim : args.latent_dim, act,
                                              nn::OutputHead::identity);
        std::vector<std::size_t> rev(args.hidden.rbegin(), args.hidden.rend());
        const auto dec =
            nn::MlpSpec::uniform(args.latent_dim, rev, data.dim, act, nn::OutputHead::identity);
        const manifold::ChartTrainResult res = vae ? manifold::train_vae(data, enc, dec, args.optim)
                                                   : manifold::train_autoencoder(data, enc, dec, args.optim);

        const auto inputs = data.all_inputs();
        const std::vector<numkit::Vector> head(inputs.begin(),
                                               inputs.begin() + std::min<std::size_t>(100, inputs.size()));
        const double mse_head = manifold::reconstruction_mse(*res.chart, head);

        manifold::Metadata echo = {
            {"kind", args.kind},
            {"latent_dim", std::to_string(args.latent_dim)},
            {"hidden", [&] {
                 std::string s;
                 for (std::size_t i = 0; i < args.hidden.size(); ++i) {
                     s += (i ? "," : "") + std::to_string(args.hidden[i]);
                 }
                 return s;
             }()},
            {"activation", act.name()},
            {"steps", std::to_string(args.optim.steps)},
            {"batch", std::to_string(args.optim.batch)},
            {"lr", util::format_double(args.optim.lr)},
            {"seed", std::to_string(args.optim.seed)},
            {"data_hash", data_hash},
        };

        auto os = open_out(args.out);
        write_comment_block(os, echo);
        manifold::write_chart(os, *res.chart);
        close_checked(os, args.out);

        const std::string metrics_path = args.metrics_out.empty() ? args.out + ".metrics" : args.metrics_out;
        auto ms = open_out(metrics_path);
        for (const auto& e : res.log) {
            ms << "record:log\tstep:" << e.step << "\tmse:" << util::format_double(e.mse);
            if (vae) ms << "\telbo:" << util::format_double(e.elbo) << "\tkl:" << util::format_double(e.kl);
            ms << '\n';
        }
        ms << "record:summary\tfinal_mse:" << util::format_double(res.final_mse)
           << "\tmse_head100:" << util::format_double(mse_head);
        if (vae) ms << "\tfinal_elbo:" << util::format_double(res.final_elbo);
        for (const auto& [k, v] : echo) ms << "\tconfig." << k << ':' << v;
        ms << '\n';
        close_checked(ms, metrics_path);

        out << "trained " << args.kind << " chart (d=" << args.latent_dim
            << "): final_mse=" << util::format_double(res.final_mse);
        if (vae) out << " final_elbo=" << util::format_double(res.final_elbo);
        out << '\n';
        return kOk;
    });
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        RunConfig cfg;
        if (!args.config.empty()) cfg = load_run_config(args.config);
        apply_env_overrides(cfg);
        for (const auto& [k, v] : args.overrides) cfg.set(k, v);
        if (!args.method.empty()) cfg.set("method", args.method);
        if (!args.data.empty()) cfg.data_in = args.data;
        if (!args.chart.empty()) cfg.chart_in = args.chart;
        if (!args.eval_data.empty()) cfg.eval_in = args.eval_data;
        if (!args.model_out.empty()) cfg.model_out = args.model_out;
        if (!args.report_out.empty()) cfg.report_out = args.report_out;

        if (cfg.ssl.needs_chart() && cfg.chart_in.empty()) {
            throw MissingChart("method '" + train::method_name(cfg.ssl.method) +
                               "' requires --chart (oracle-rings or a chart checkpoint)");
        }
        if (cfg.model_out.empty()) throw std::invalid_argument("missing --model-out");
        const manifold::Dataset data = load_dataset(cfg.data_in);
        const ResolvedChart chart = cfg.ssl.needs_chart()
                                        ? resolve_chart(cfg.chart_in, data, cfg)
                                        : ResolvedChart{};
        std::vector<manifold::LabeledPoint> eval_set;
        std::string eval_hash = "none";
        if (!cfg.eval_in.empty()) {
            eval_set = manifold::load_csv(cfg.eval_in).labeled;
            eval_hash = util::file_git_hash(cfg.eval_in);
        }

        const nn::MlpSpec spec = cfg.classifier_spec(data.dim, data.num_classes);
        const train::TrainResult res = train::train(data, chart.chart.get(), spec, cfg.ssl, eval_set);

        manifold::Metadata summary;
        summary.emplace_back("dataset_hash", util::file_git_hash(cfg.data_in));
        summary.emplace_back("eval_hash", eval_hash);
        summary.emplace_back("chart", chart.chart ? chart.label : std::string("none"));
        for (const auto& [k, v] : cfg.resolved()) summary.emplace_back("config." + k, v);

        auto ms = open_out(cfg.model_out);
        write_comment_block(ms, summary);
        nn::write_checkpoint(ms, res.classifier);
        close_checked(ms, cfg.model_out);
        if (!cfg.report_out.empty()) {
            auto rs = open_out(cfg.report_out);
            train::write_report(rs, res.report, summary);
            close_checked(rs, cfg.report_out);
        }
        out << "trained " << train::method_name(cfg.ssl.method) << " classifier for "
            << res.report.updates << " updates";
        if (res.report.final_eval_error >= 0) out << ", eval error " << pct(res.report.final_eval_error) << '%';
        out << '\n';
        return kOk;
    });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        const manifold::Dataset data = load_dataset(args.data);
        nn::Mlp model;
        try {
            model = load_model(args.model);
        } catch (const FormatError& e) {
            throw CheckpointMismatch(e.what());
        }
        if (model.spec.input_dim() != data.dim) {
            throw CheckpointMismatch("model input dimension " + std::to_string(model.spec.input_dim()) +
                                     " does not match data dimension " + std::to_string(data.dim));
        }
        for (const auto& p : data.labeled) {
            if (p.label >= model.spec.output_dim()) {
                throw CheckpointMismatch("data label exceeds the model's class count");
            }
        }
        const double error = train::evaluate(model, data.labeled);
        out << pct(error) << '\n';
        if (!args.record_out.empty()) {
            auto rs = open_out(args.record_out);
            rs << "record:eval\terror:" << util::format_double(error) << "\terror_pct:" << pct(error)
               << "\tpoints:" << data.labeled.size() << "\tmodel_hash:" << util::file_git_hash(args.model)
               << "\tdata_hash:" << util::file_git_hash(args.data) << '\n';
            close_checked(rs, args.record_out);
        }
        return kOk;
    });
}

int cmd_boundary(const BoundaryArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        nn::Mlp model;
        try {
            model = load_model(args.model);
        } catch (const FormatError& e) {
            throw CheckpointMismatch(e.what());
        }
        const auto grid = train::decision_boundary_grid(model, args.bbox, args.resolution);
        auto os = open_out(args.out);
        train::write_grid_csv(os, grid);
        close_checked(os, args.out);
        out << "wrote " << grid.size() << " grid points to " << args.out << '\n';
        return kOk;
    });
}

void write_repro_table(std::ostream& os, const ReproSummary& summary) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-18s %10s %10s  %s\n", "method", "mean(%)", "std(%)", "per-seed(%)");
    os << buf;
    for (const auto& row : summary.rows) {
        std::snprintf(buf, sizeof buf, "%-18s %10.2f %10.2f  ", row.method.c_str(), row.mean, row.stddev);
        os << buf;
        for (std::size_t i = 0; i < row.errors.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.2f", i ? " " : "", row.errors[i]);
            os << buf;
        }
        os << '\n';
    }
}

int cmd_repro_two_rings(const ReproArgs& args, std::ostream& out, std::ostream& err,
                        ReproSummary* summary_out) {
    return guarded(err, [&]() -> int {
        if (args.seeds == 0) throw std::invalid_argument("--seeds must be >= 1");
        if (args.test_points < 2) throw std::invalid_argument("--test-points must be >= 2");
        const auto t0 = std::chrono::steady_clock::now();
        const std::string cfg_dir = args.config_dir.empty() ? default_config_dir() : args.config_dir;
        struct Cell {
            std::string row;
            std::string file;
            RunConfig cfg;
        };
        std::vector<Cell> cells = {
            {"supervised", "two_rings_supervised.cfg", {}},
            {"vat", "two_rings_vat.cfg", {}},
            {"tnar-oracle-ent", "two_rings_tnar.cfg", {}},
        };
        for (auto& c : cells) {
            c.cfg = load_run_config((fs::path(cfg_dir) / c.file).string());
            apply_env_overrides(c.cfg);
            if (args.total_updates) {
                c.cfg.ssl.total_updates = *args.total_updates;
                c.cfg.ssl.lr_decay_start = std::min(c.cfg.ssl.lr_decay_start, *args.total_updates);
            }
        }
        fs::create_directories(args.out_dir);

        ReproSummary summary;
        for (const auto& c : cells) summary.rows.push_back({c.row, 0.0, 0.0, {}});

        const manifold::TwoRingsConfig base_rings = cells.back().cfg.rings;
        for (std::size_t s = 0; s < args.seeds; ++s) {
            const fs::path dir = fs::path(args.out_dir) / ("seed_" + std::to_string(s));
            fs::create_directories(dir);
            manifold::TwoRingsConfig rings = base_rings;
            rings.seed = base_rings.seed + s;
            manifold::TwoRingsConfig test_rings = base_rings;
            test_rings.seed = base_rings.seed + 1000003 + s;
            test_rings.n_unlabeled = 0;
            test_rings.n_labeled_per_class = args.test_points / 2;
            test_rings.random_label_angles = true;

            const std::string train_path = (dir / "train.csv").string();
            const std::string test_path = (dir / "test.csv").string();
            manifold::save_csv(train_path, manifold::gen_two_rings(rings));
            manifold::save_csv(test_path, manifold::gen_two_rings(test_rings));

            for (std::size_t m = 0; m < cells.size(); ++m) {
                TrainArgs ta;
                ta.config = (fs::path(cfg_dir) / cells[m].file).string();
                ta.data = train_path;
                ta.eval_data = test_path;
                ta.model_out = (dir / (cells[m].row + ".model")).string();
                ta.report_out = (dir / (cells[m].row + ".report")).string();
                ta.overrides.emplace_back("seed", std::to_string(cells[m].cfg.ssl.seed + s));
                ta.overrides.emplace_back("total_updates", std::to_string(cells[m].cfg.ssl.total_updates));
                ta.overrides.emplace_back("lr_decay_start", std::to_string(cells[m].cfg.ssl.lr_decay_start));
                if (cells[m].cfg.ssl.needs_chart()) ta.chart = "oracle-rings";
                std::ostringstream sink;
                const int rc = cmd_train(ta, sink, err);
                if (rc != kOk) return rc;

                EvalArgs ea{ta.model_out, test_path, (dir / (cells[m].row + ".eval")).string()};
                std::ostringstream eval_out;
                const int erc = cmd_eval(ea, eval_out, err);
                if (erc != kOk) return erc;
                const nn::Mlp model = load_model(ta.model_out);
                const double error =
                    100.0 * train::evaluate(model, manifold::load_csv(test_path).labeled);
                summary.rows[m].errors.push_back(error);
                err << "seed " << s << " " << cells[m].row << ": " << pct(error / 100.0) << "%\n";
            }
        }
        for (auto& row : summary.rows) {
            double sum = 0.0;
            for (double e : row.errors) sum += e;
            row.mean = sum / static_cast<double>(row.errors.size());
            double ss = 0.0;
            for (double e : row.errors) ss += (e - row.mean) * (e - row.mean);
            row.stddev = row.errors.size() > 1 ? std::sqrt(ss / static_cast<double>(row.errors.size() - 1)) : 0.0;
        }
        summary.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        const std::string table_path = (fs::path(args.out_dir) / "summary.csv").string();
        auto ts = open_out(table_path);
        ts << "method,mean,std,errors\n";
        for (const auto& row : summary.rows) {
            ts << row.method << ',' << util::format_double(row.mean) << ','
               << util::format_double(row.stddev) << ',';
            for (std::size_t i = 0; i < row.errors.size(); ++i) {
                ts << (i ? ";" : "") << util::format_double(row.errors[i]);
            }
            ts << '\n';
        }
        close_checked(ts, table_path);
        write_repro_table(out, summary);
        err << "repro wall time " << summary.wall_seconds << " s\n";
        if (summary_out) *summary_out = summary;
        return kOk;
    });
}

}  // namespace tnar::cli
