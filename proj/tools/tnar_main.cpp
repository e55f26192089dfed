#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "tnar/cli/commands.hpp"
#include "tnar/cli/run_config.hpp"
#include "tnar/util/format.hpp"

namespace {

using namespace tnar;

train::BBox parse_bbox(const std::string& s) {
    const auto parts = util::split(s, ',');
    if (parts.size() != 4) throw CLI::ValidationError("--bbox", "expected xmin,xmax,ymin,ymax");
    train::BBox b;
    try {
        b.xmin = util::parse_double(parts[0]);
        b.xmax = util::parse_double(parts[1]);
        b.ymin = util::parse_double(parts[2]);
        b.ymax = util::parse_double(parts[3]);
    } catch (const FormatError& e) {
        throw CLI::ValidationError("--bbox", e.what());
    }
    if (!(b.xmin < b.xmax) || !(b.ymin < b.ymax)) {
        throw CLI::ValidationError("--bbox", "need xmin < xmax and ymin < ymax");
    }
    return b;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tangent-normal adversarial regularization for semi-supervised learning"};
    app.require_subcommand(1);

    cli::GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate the two-rings dataset as CSV");
    gen_cmd->add_option("--n-unlabeled", gen.rings.n_unlabeled, "Unlabeled points")->capture_default_str();
    gen_cmd->add_option("--n-labeled-per-class", gen.rings.n_labeled_per_class, "Labeled points per ring")
        ->capture_default_str();
    gen_cmd->add_option("--radius-inner", gen.rings.radius_inner)->capture_default_str();
    gen_cmd->add_option("--radius-outer", gen.rings.radius_outer)->capture_default_str();
    gen_cmd->add_option("--noise-sigma", gen.rings.noise_sigma, "Isotropic Gaussian noise")
        ->capture_default_str();
    gen_cmd->add_flag("--random-label-angles", gen.rings.random_label_angles,
                      "Draw labeled angles uniformly instead of evenly spaced");
    gen_cmd->add_option("--seed", gen.rings.seed)->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "Output CSV")->required();

    cli::TrainManifoldArgs tm;
    std::string tm_hidden = "32,32";
    auto* tm_cmd = app.add_subcommand("train-manifold", "Train an autoencoder or VAE chart");
    tm_cmd->add_option("--kind", tm.kind, "ae or vae")->capture_default_str();
    tm_cmd->add_option("--latent-dim", tm.latent_dim)->capture_default_str();
    tm_cmd->add_option("--data", tm.data, "Dataset CSV")->required();
    tm_cmd->add_option("--out", tm.out, "Chart checkpoint")->required();
    tm_cmd->add_option("--metrics-out", tm.metrics_out, "Metrics file (default <out>.metrics)");
    tm_cmd->add_option("--hidden", tm_hidden, "Encoder hidden widths; decoder mirrors them")
        ->capture_default_str();
    tm_cmd->add_option("--activation", tm.activation)->capture_default_str();
    tm_cmd->add_option("--steps", tm.optim.steps)->capture_default_str();
    tm_cmd->add_option("--batch", tm.optim.batch)->capture_default_str();
    tm_cmd->add_option("--lr", tm.optim.lr)->capture_default_str();
    tm_cmd->add_option("--seed", tm.optim.seed)->capture_default_str();
    tm_cmd->add_option("--log-every", tm.optim.log_every)->capture_default_str();

    cli::TrainArgs tr;
    std::vector<std::string> tr_sets;
    auto* tr_cmd = app.add_subcommand("train", "Train a classifier");
    tr_cmd->add_option("--method", tr.method, "supervised, vat, tar, nar or tnar");
    tr_cmd->add_option("--config", tr.config, "Run configuration file");
    tr_cmd->add_option("--data", tr.data, "Training CSV");
    tr_cmd->add_option("--chart", tr.chart, "oracle-rings or a chart checkpoint");
    tr_cmd->add_option("--eval-data", tr.eval_data, "Labeled CSV evaluated while training");
    tr_cmd->add_option("--model-out", tr.model_out, "Classifier checkpoint");
    tr_cmd->add_option("--report-out", tr.report_out, "Training report");
    tr_cmd->add_option("--seed", [&tr](const std::vector<std::string>& v) {
        tr.overrides.emplace_back("seed", v.front());
        return true;
    }, "Training seed");
    tr_cmd->add_option("--set", tr_sets, "Override a config key (key=value), repeatable");

    cli::EvalArgs ev;
    auto* ev_cmd = app.add_subcommand("eval", "Print the error rate (%) of a model on labeled data");
    ev_cmd->add_option("--model", ev.model)->required();
    ev_cmd->add_option("--data", ev.data)->required();
    ev_cmd->add_option("--record-out", ev.record_out, "Evaluation record");

    cli::BoundaryArgs bd;
    std::string bbox_str = "-1.5,1.5,-1.5,1.5";
    auto* bd_cmd = app.add_subcommand("boundary", "Export the decision boundary on a grid");
    bd_cmd->add_option("--model", bd.model)->required();
    bd_cmd->add_option("--bbox", bbox_str, "xmin,xmax,ymin,ymax")->capture_default_str();
    bd_cmd->add_option("--resolution", bd.resolution, "Grid points per axis")->capture_default_str();
    bd_cmd->add_option("--out", bd.out)->required();

    cli::ReproArgs rp;
    std::size_t rp_updates = 0;
    auto* rp_cmd = app.add_subcommand("repro-two-rings", "Reproduce the two-rings comparison table");
    rp_cmd->add_option("--seeds", rp.seeds)->capture_default_str();
    rp_cmd->add_option("--out-dir", rp.out_dir)->capture_default_str();
    rp_cmd->add_option("--config-dir", rp.config_dir, "Directory with two_rings_*.cfg");
    rp_cmd->add_option("--test-points", rp.test_points)->capture_default_str();
    rp_cmd->add_option("--total-updates", rp_updates, "Override the number of updates");

    try {
        app.parse(argc, argv);
        if (*bd_cmd) bd.bbox = parse_bbox(bbox_str);
        if (*tm_cmd) tm.hidden = cli::parse_size_list(tm_hidden);
        for (const auto& s : tr_sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value");
            tr.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
        }
        if (rp_updates) rp.total_updates = rp_updates;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kBadFlags;
    } catch (const tnar::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kBadFlags;
    }

    if (*gen_cmd) return cli::cmd_gen_data(gen, std::cout, std::cerr);
    if (*tm_cmd) return cli::cmd_train_manifold(tm, std::cout, std::cerr);
    if (*tr_cmd) return cli::cmd_train(tr, std::cout, std::cerr);
    if (*ev_cmd) return cli::cmd_eval(ev, std::cout, std::cerr);
    if (*bd_cmd) return cli::cmd_boundary(bd, std::cout, std::cerr);
    return cli::cmd_repro_two_rings(rp, std::cout, std::cerr);
}
