#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>

#include "tnar/nn/mlp.hpp"
#include "tnar/numkit/linalg.hpp"

namespace tnar::manifold {

using numkit::Vector;

enum class ChartKind { oracle_rings, autoencoder, vae };

std::string chart_kind_name(ChartKind k);

// Local coordinate on a (possibly piecewise) chart: `patch` picks the
// coordinate patch, `z` is the latent position inside it.
struct ChartPoint {
    std::size_t patch = 0;
    Vector z;

    ChartPoint shifted(const Vector& delta) const { return {patch, z + delta}; }
};

// Encoder h: R^D -> R^d and decoder g: R^d -> R^D with exact decoder
// Jacobian products.
class Chart {
public:
    virtual ~Chart() = default;

    virtual ChartKind kind() const = 0;
    virtual std::size_t latent_dim() const = 0;
    virtual std::size_t ambient_dim() const = 0;

    virtual ChartPoint encode(const Vector& x) const = 0;
    virtual Vector decode(const ChartPoint& p) const = 0;
    // J_z g * eta
    virtual Vector jvp(const ChartPoint& p, const Vector& eta) const = 0;
    // (J_z g)^T * u
    virtual Vector vjp(const ChartPoint& p, const Vector& u) const = 0;
};

// Analytic piecewise chart of the two-rings manifold: patch 0 is the inner
// circle, patch 1 the outer one, z is the angle.
class OracleRingsChart final : public Chart {
public:
    OracleRingsChart(double radius_inner = 0.9, double radius_outer = 1.1);

    ChartKind kind() const override { return ChartKind::oracle_rings; }
    std::size_t latent_dim() const override { return 1; }
    std::size_t ambient_dim() const override { return 2; }

    // Nearest ring (ties to the inner one) and atan2 angle; OriginError at ||x|| <= 1e-12.
    ChartPoint encode(const Vector& x) const override;
    Vector decode(const ChartPoint& p) const override;
    Vector jvp(const ChartPoint& p, const Vector& eta) const override;
    Vector vjp(const ChartPoint& p, const Vector& u) const override;

    double radius(std::size_t ring) const;

private:
    double radii_[2];
};

// Learned chart: encoder network (for a VAE, the first d outputs are the
// posterior mean) and decoder network.
class NetworkChart final : public Chart {
public:
    NetworkChart(ChartKind kind, nn::Mlp encoder, nn::Mlp decoder);

    ChartKind kind() const override { return kind_; }
    std::size_t latent_dim() const override { return decoder_.spec.input_dim(); }
    std::size_t ambient_dim() const override { return decoder_.spec.output_dim(); }

    ChartPoint encode(const Vector& x) const override;
    Vector decode(const ChartPoint& p) const override;
    Vector jvp(const ChartPoint& p, const Vector& eta) const override;
    Vector vjp(const ChartPoint& p, const Vector& u) const override;

    const nn::Mlp& encoder() const { return encoder_; }
    const nn::Mlp& decoder() const { return decoder_; }

private:
    ChartKind kind_;
    nn::Mlp encoder_;
    nn::Mlp decoder_;
};

// Header line `chart kind=<ae|vae> latent_dim=<d>` followed by the encoder and
// decoder in network checkpoint format.
void write_chart(std::ostream& os, const NetworkChart& chart);
std::shared_ptr<NetworkChart> read_chart(std::istream& is);

// Mean over points of ||x - g(h(x))||^2 / D.
double reconstruction_mse(const Chart& chart, const std::vector<Vector>& points);

}  // namespace tnar::manifold
