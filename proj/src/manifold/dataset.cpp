#include "tnar/manifold/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "tnar/errors.hpp"
#include "tnar/util/format.hpp"

namespace tnar::manifold {

void Dataset::validate() const {
    for (const auto& p : labeled) {
        if (p.x.size() != dim) throw DimensionMismatch("Dataset: labeled point has wrong dimension");
        if (p.label >= num_classes) throw std::invalid_argument("Dataset: label out of range");
    }
    for (const auto& x : unlabeled) {
        if (x.size() != dim) throw DimensionMismatch("Dataset: unlabeled point has wrong dimension");
    }
}

std::vector<Vector> Dataset::all_inputs() const {
    std::vector<Vector> out;
    out.reserve(labeled.size() + unlabeled.size());
    for (const auto& p : labeled) out.push_back(p.x);
    out.insert(out.end(), unlabeled.begin(), unlabeled.end());
    return out;
}

const std::string* Dataset::find_meta(const std::string& key) const {
    for (const auto& [k, v] : meta) {
        if (k == key) return &v;
    }
    return nullptr;
}

void write_csv(std::ostream& os, const Dataset& data) {
    data.validate();
    for (const auto& [k, v] : data.meta) os << "# " << k << '=' << v << '\n';
    os << "# num_classes=" << data.num_classes << '\n';
    for (std::size_t d = 0; d < data.dim; ++d) os << 'x' << d + 1 << ',';
    os << "label\n";
    auto row = [&](const Vector& x, long long label) {
        for (double v : x) os << util::format_double(v) << ',';
        os << label << '\n';
    };
    for (const auto& p : data.labeled) row(p.x, static_cast<long long>(p.label));
    for (const auto& x : data.unlabeled) row(x, -1);
}

Dataset read_csv(std::istream& is) {
    Dataset data;
    std::string line;
    bool have_header = false;
    long long declared_classes = -1;
    long long max_label = -1;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto t = util::trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            const auto body = util::trim(t.substr(1));
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) continue;
            std::string key(util::trim(body.substr(0, eq)));
            std::string value(util::trim(body.substr(eq + 1)));
            if (key == "num_classes") {
                declared_classes = util::parse_int(value);
            } else {
                data.meta.emplace_back(std::move(key), std::move(value));
            }
            continue;
        }
        const auto cells = util::split(t, ',');
        if (!have_header) {
            if (cells.size() < 2 || util::trim(cells.back()) != "label") {
                throw FormatError("dataset csv: header must end with 'label'");
            }
            data.dim = cells.size() - 1;
            have_header = true;
            continue;
        }
        if (cells.size() != data.dim + 1) {
            throw FormatError("dataset csv: line " + std::to_string(line_no) + " has " +
                              std::to_string(cells.size()) + " fields, expected " +
                              std::to_string(data.dim + 1));
        }
        Vector x(data.dim);
        for (std::size_t d = 0; d < data.dim; ++d) x[d] = util::parse_double(cells[d]);
        const long long label = util::parse_int(cells.back());
        if (label < -1) throw FormatError("dataset csv: negative label other than -1");
        if (label == -1) {
            data.unlabeled.push_back(std::move(x));
        } else {
            max_label = std::max(max_label, label);
            data.labeled.push_back({std::move(x), static_cast<std::size_t>(label)});
        }
    }
    if (!have_header) throw FormatError("dataset csv: missing header");
    data.num_classes = static_cast<std::size_t>(std::max(declared_classes, max_label + 1));
    data.validate();
    return data;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
    return read_csv(in);
}

void save_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
    write_csv(out, data);
    if (!out) throw std::ios_base::failure("write failed for '" + path + "'");
}

}  // namespace tnar::manifold
