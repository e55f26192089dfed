#include "tnar/cli/run_config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>

#include "tnar/util/format.hpp"

namespace tnar::cli {

namespace {

struct KeyBinding {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

double to_double(const std::string& v) { return util::parse_double(v); }

std::size_t to_size(const std::string& v) {
    const long long n = util::parse_int(v);
    if (n < 0) throw FormatError("expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(n);
}

std::uint64_t to_u64(const std::string& v) {
    const auto t = util::trim(v);
    std::uint64_t out = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw FormatError("expected an unsigned integer, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw FormatError("expected a boolean, got '" + v + "'");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

#define TNAR_DOUBLE_KEY(name, field)                                                   \
    {name, {[](RunConfig& c, const std::string& v) { c.field = to_double(v); },        \
            [](const RunConfig& c) { return util::format_double(c.field); }}}
#define TNAR_SIZE_KEY(name, field)                                                     \
    {name, {[](RunConfig& c, const std::string& v) { c.field = to_size(v); },          \
            [](const RunConfig& c) { return std::to_string(c.field); }}}
#define TNAR_BOOL_KEY(name, field)                                                     \
    {name, {[](RunConfig& c, const std::string& v) { c.field = to_bool(v); },          \
            [](const RunConfig& c) { return from_bool(c.field); }}}
#define TNAR_STRING_KEY(name, field)                                                   \
    {name, {[](RunConfig& c, const std::string& v) { c.field = v; },                   \
            [](const RunConfig& c) { return c.field; }}}

const std::vector<std::pair<std::string, KeyBinding>>& bindings() {
    static const std::vector<std::pair<std::string, KeyBinding>> table = {
        // dataset
        TNAR_SIZE_KEY("n_unlabeled", rings.n_unlabeled),
        TNAR_SIZE_KEY("n_labeled_per_class", rings.n_labeled_per_class),
        TNAR_DOUBLE_KEY("radius_inner", rings.radius_inner),
        TNAR_DOUBLE_KEY("radius_outer", rings.radius_outer),
        TNAR_DOUBLE_KEY("noise_sigma", rings.noise_sigma),
        TNAR_BOOL_KEY("random_label_angles", rings.random_label_angles),
        {"data_seed", {[](RunConfig& c, const std::string& v) { c.rings.seed = to_u64(v); },
                       [](const RunConfig& c) { return std::to_string(c.rings.seed); }}},
        // objective and schedule
        {"method", {[](RunConfig& c, const std::string& v) {
                        try {
                            c.ssl.method = train::parse_method(v);
                        } catch (const std::invalid_argument& e) {
                            throw FormatError(e.what());
                        }
                    },
                    [](const RunConfig& c) { return train::method_name(c.ssl.method); }}},
        TNAR_DOUBLE_KEY("alpha_tangent", ssl.alpha_tangent),
        TNAR_DOUBLE_KEY("alpha_normal", ssl.alpha_normal),
        TNAR_DOUBLE_KEY("alpha_entropy", ssl.alpha_entropy),
        TNAR_DOUBLE_KEY("alpha_vat", ssl.alpha_vat),
        TNAR_SIZE_KEY("labeled_batch", ssl.labeled_batch),
        TNAR_SIZE_KEY("unlabeled_batch", ssl.unlabeled_batch),
        TNAR_SIZE_KEY("total_updates", ssl.total_updates),
        TNAR_DOUBLE_KEY("lr", ssl.lr),
        TNAR_SIZE_KEY("lr_decay_start", ssl.lr_decay_start),
        {"seed", {[](RunConfig& c, const std::string& v) { c.ssl.seed = to_u64(v); },
                  [](const RunConfig& c) { return std::to_string(c.ssl.seed); }}},
        TNAR_SIZE_KEY("log_every", ssl.log_every),
        TNAR_BOOL_KEY("regularize_labeled", ssl.regularize_labeled),
        TNAR_BOOL_KEY("parallel", ssl.parallel),
        // adversarial solver
        TNAR_DOUBLE_KEY("eps_tangent", ssl.adv.eps_tangent),
        TNAR_DOUBLE_KEY("eps_normal", ssl.adv.eps_normal),
        TNAR_DOUBLE_KEY("eps_vat", ssl.adv.eps_vat),
        TNAR_DOUBLE_KEY("lambda_orth", ssl.adv.lambda_orth),
        TNAR_SIZE_KEY("power_iters", ssl.adv.power_iters),
        TNAR_SIZE_KEY("cg_iters", ssl.adv.cg_iters),
        TNAR_DOUBLE_KEY("cg_tol", ssl.adv.cg_tol),
        TNAR_DOUBLE_KEY("fd_step", ssl.adv.fd_step),
        {"jtj_mode",
         {[](RunConfig& c, const std::string& v) {
              if (v == "exact") {
                  c.ssl.adv.jtj_mode = reg::JtjMode::exact;
              } else if (v == "k_finite_difference") {
                  c.ssl.adv.jtj_mode = reg::JtjMode::k_finite_difference;
              } else {
                  throw FormatError("jtj_mode must be exact or k_finite_difference");
              }
          },
          [](const RunConfig& c) {
              return std::string(c.ssl.adv.jtj_mode == reg::JtjMode::exact ? "exact"
                                                                          : "k_finite_difference");
          }}},
        // classifier
        {"hidden", {[](RunConfig& c, const std::string& v) { c.hidden = parse_size_list(v); },
                    [](const RunConfig& c) { return join_sizes(c.hidden); }}},
        {"activation",
         {[](RunConfig& c, const std::string& v) { c.activation = nn::Activation::parse(v); },
          [](const RunConfig& c) { return c.activation.name(); }}},
        // paths
        TNAR_STRING_KEY("data_in", data_in),
        TNAR_STRING_KEY("chart_in", chart_in),
        TNAR_STRING_KEY("eval_in", eval_in),
        TNAR_STRING_KEY("model_out", model_out),
        TNAR_STRING_KEY("report_out", report_out),
    };
    return table;
}

#undef TNAR_DOUBLE_KEY
#undef TNAR_SIZE_KEY
#undef TNAR_BOOL_KEY
#undef TNAR_STRING_KEY

const KeyBinding& binding(const std::string& key) {
    for (const auto& [k, b] : bindings()) {
        if (k == key) return b;
    }
    throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

std::vector<std::size_t> parse_size_list(const std::string& s) {
    std::vector<std::size_t> out;
    if (util::trim(s).empty()) return out;
    for (const auto& part : util::split(s, ',')) {
        const long long v = util::parse_int(part);
        if (v <= 0) throw FormatError("layer widths must be positive");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const KeyBinding& b = binding(key);
    try {
        b.set(*this, std::string(util::trim(value)));
    } catch (const FormatError& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

std::string RunConfig::get(const std::string& key) const { return binding(key).get(*this); }

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, b] : bindings()) v.push_back(k);
        return v;
    }();
    return names;
}

manifold::Metadata RunConfig::resolved() const {
    manifold::Metadata out;
    for (const auto& [k, b] : bindings()) out.emplace_back(k, b.get(*this));
    return out;
}

nn::MlpSpec RunConfig::classifier_spec(std::size_t input_dim, std::size_t num_classes) const {
    return nn::MlpSpec::uniform(input_dim, hidden, num_classes, activation, nn::OutputHead::logits);
}

void parse_run_config(std::istream& is, RunConfig& cfg) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const auto body = util::trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        cfg.set(std::string(util::trim(body.substr(0, eq))),
                std::string(util::trim(body.substr(eq + 1))));
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config '" + path + "'");
    RunConfig cfg;
    parse_run_config(in, cfg);
    return cfg;
}

void apply_env_overrides(RunConfig& cfg, const std::string& prefix) {
    for (const auto& key : RunConfig::keys()) {
        std::string var = prefix;
        for (char ch : key) var += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (const char* v = std::getenv(var.c_str())) cfg.set(key, v);
    }
}

}  // namespace tnar::cli
