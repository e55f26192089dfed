#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tnar/numkit/linalg.hpp"

namespace tnar::manifold {

using numkit::Vector;

struct LabeledPoint {
    Vector x;
    std::size_t label = 0;
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

struct Dataset {
    std::vector<LabeledPoint> labeled;
    std::vector<Vector> unlabeled;
    std::size_t num_classes = 0;
    std::size_t dim = 0;
    Metadata meta;  // generator settings, written as '# key=value' lines

    // Throws DimensionMismatch / std::invalid_argument on inconsistent content.
    void validate() const;

    // labeled inputs followed by unlabeled inputs
    std::vector<Vector> all_inputs() const;

    const std::string* find_meta(const std::string& key) const;
};

// CSV: optional '# key=value' lines, header `x1,...,xD,label`, one row per
// point (labeled rows first), label -1 for unlabeled, 17 significant digits.
void write_csv(std::ostream& os, const Dataset& data);
Dataset read_csv(std::istream& is);

Dataset load_csv(const std::string& path);
void save_csv(const std::string& path, const Dataset& data);

}  // namespace tnar::manifold
