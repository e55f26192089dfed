#include "tnar/manifold/chart.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "tnar/errors.hpp"
#include "tnar/util/format.hpp"

namespace tnar::manifold {

namespace {

void require_len(const Vector& v, std::size_t n, const char* what) {
    if (v.size() != n) {
        throw DimensionMismatch(std::string(what) + ": length " + std::to_string(v.size()) +
                                ", expected " + std::to_string(n));
    }
}

}  // namespace

std::string chart_kind_name(ChartKind k) {
    switch (k) {
        case ChartKind::oracle_rings: return "oracle-rings";
        case ChartKind::autoencoder: return "ae";
        case ChartKind::vae: return "vae";
    }
    return "ae";
}

OracleRingsChart::OracleRingsChart(double radius_inner, double radius_outer)
    : radii_{radius_inner, radius_outer} {
    if (!(radius_inner > 0.0 && radius_inner < radius_outer)) {
        throw std::invalid_argument("OracleRingsChart: need 0 < inner < outer");
    }
}

double OracleRingsChart::radius(std::size_t ring) const { return radii_[ring == 0 ? 0 : 1]; }

ChartPoint OracleRingsChart::encode(const Vector& x) const {
    require_len(x, 2, "OracleRingsChart::encode");
    const double r = std::hypot(x[0], x[1]);
    if (r <= 1e-12) throw OriginError("OracleRingsChart::encode: point at the origin");
    const std::size_t ring = std::abs(r - radii_[0]) <= std::abs(r - radii_[1]) ? 0 : 1;
    return {ring, Vector{std::atan2(x[1], x[0])}};
}

Vector OracleRingsChart::decode(const ChartPoint& p) const {
    require_len(p.z, 1, "OracleRingsChart::decode");
    const double r = radius(p.patch);
    return {r * std::cos(p.z[0]), r * std::sin(p.z[0])};
}

Vector OracleRingsChart::jvp(const ChartPoint& p, const Vector& eta) const {
    require_len(p.z, 1, "OracleRingsChart::jvp");
    require_len(eta, 1, "OracleRingsChart::jvp");
    const double r = radius(p.patch);
    return {-r * std::sin(p.z[0]) * eta[0], r * std::cos(p.z[0]) * eta[0]};
}

Vector OracleRingsChart::vjp(const ChartPoint& p, const Vector& u) const {
    require_len(p.z, 1, "OracleRingsChart::vjp");
    require_len(u, 2, "OracleRingsChart::vjp");
    const double r = radius(p.patch);
    return {r * (-std::sin(p.z[0]) * u[0] + std::cos(p.z[0]) * u[1])};
}

NetworkChart::NetworkChart(ChartKind kind, nn::Mlp encoder, nn::Mlp decoder)
    : kind_(kind), encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
    if (kind_ == ChartKind::oracle_rings) {
        throw std::invalid_argument("NetworkChart: kind must be ae or vae");
    }
    const std::size_t d = decoder_.spec.input_dim();
    const std::size_t enc_out = kind_ == ChartKind::vae ? 2 * d : d;
    if (encoder_.spec.output_dim() != enc_out) {
        throw DimensionMismatch("NetworkChart: encoder output " +
                                std::to_string(encoder_.spec.output_dim()) + ", expected " +
                                std::to_string(enc_out));
    }
    if (encoder_.spec.input_dim() != decoder_.spec.output_dim()) {
        throw DimensionMismatch("NetworkChart: encoder input and decoder output differ");
    }
}

ChartPoint NetworkChart::encode(const Vector& x) const {
    Vector out = nn::forward(encoder_, x);
    const std::size_t d = latent_dim();
    if (out.size() == d) return {0, std::move(out)};
    Vector mean(d);
    for (std::size_t i = 0; i < d; ++i) mean[i] = out[i];
    return {0, std::move(mean)};
}

Vector NetworkChart::decode(const ChartPoint& p) const { return nn::forward(decoder_, p.z); }

Vector NetworkChart::jvp(const ChartPoint& p, const Vector& eta) const {
    return nn::jvp(decoder_, p.z, eta);
}

Vector NetworkChart::vjp(const ChartPoint& p, const Vector& u) const {
    return nn::grad_input(decoder_, p.z, u);
}

void write_chart(std::ostream& os, const NetworkChart& chart) {
    os << "chart kind=" << chart_kind_name(chart.kind()) << " latent_dim=" << chart.latent_dim()
       << '\n';
    nn::write_checkpoint(os, chart.encoder());
    nn::write_checkpoint(os, chart.decoder());
}

std::shared_ptr<NetworkChart> read_chart(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
        const auto t = util::trim(line);
        if (!t.empty() && t.front() != '#') break;
    }
    std::istringstream header(line);
    std::string magic, kind_tok, dim_tok;
    header >> magic >> kind_tok >> dim_tok;
    if (magic != "chart" || kind_tok.rfind("kind=", 0) != 0 || dim_tok.rfind("latent_dim=", 0) != 0) {
        throw FormatError("chart checkpoint: bad header");
    }
    const std::string kind_name = kind_tok.substr(5);
    ChartKind kind;
    if (kind_name == "ae") {
        kind = ChartKind::autoencoder;
    } else if (kind_name == "vae") {
        kind = ChartKind::vae;
    } else {
        throw FormatError("chart checkpoint: unknown kind '" + kind_name + "'");
    }
    const auto latent = static_cast<std::size_t>(util::parse_int(dim_tok.substr(11)));
    nn::Mlp enc = nn::read_checkpoint(is);
    nn::Mlp dec = nn::read_checkpoint(is);
    if (dec.spec.input_dim() != latent) throw FormatError("chart checkpoint: latent_dim mismatch");
    try {
        return std::make_shared<NetworkChart>(kind, std::move(enc), std::move(dec));
    } catch (const DimensionMismatch& e) {
        throw FormatError(std::string("chart checkpoint: ") + e.what());
    }
}

double reconstruction_mse(const Chart& chart, const std::vector<Vector>& points) {
    if (points.empty()) throw EmptySet("reconstruction_mse: no points");
    double total = 0.0;
    for (const auto& x : points) {
        const Vector diff = chart.decode(chart.encode(x)) - x;
        total += numkit::dot(diff, diff) / static_cast<double>(x.size());
    }
    return total / static_cast<double>(points.size());
}

}  // namespace tnar::manifold
