#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "tnar/errors.hpp"
#include "tnar/manifold/dataset.hpp"
#include "tnar/manifold/two_rings.hpp"
#include "tnar/nn/mlp.hpp"
#include "tnar/train/ssl.hpp"

namespace tnar::cli {

class ConfigError : public Error {
public:
    using Error::Error;
};

// Flat `key = value` run configuration covering the dataset generator, the
// training objective, the adversarial solver, the classifier shape and paths.
struct RunConfig {
    manifold::TwoRingsConfig rings;
    train::SslConfig ssl;
    std::vector<std::size_t> hidden{100, 100};
    nn::Activation activation = nn::Activation::leaky_relu(0.1);
    std::string data_in;
    std::string chart_in;
    std::string eval_in;
    std::string model_out;
    std::string report_out;

    // Throws ConfigError on unknown keys or unparsable values.
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;

    static const std::vector<std::string>& keys();

    // Every key with its current value, in keys() order.
    manifold::Metadata resolved() const;

    nn::MlpSpec classifier_spec(std::size_t input_dim, std::size_t num_classes) const;
};

// Lines `key = value`; '#' starts a comment; blank lines ignored.
void parse_run_config(std::istream& is, RunConfig& cfg);
RunConfig load_run_config(const std::string& path);

// For every key, an environment variable <prefix><KEY IN UPPERCASE> overrides it.
void apply_env_overrides(RunConfig& cfg, const std::string& prefix = "TNAR_");

std::vector<std::size_t> parse_size_list(const std::string& s);

}  // namespace tnar::cli
