#include "tli/lattice.hpp"

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>

namespace tli {

LatticeBox::LatticeBox(int d, int N) : d_(d), N_(N), side_(2 * N + 1) {
    if (d < 1) throw std::invalid_argument("LatticeBox: dimension must be >= 1");
    if (N < 0) throw std::invalid_argument("LatticeBox: halfwidth must be >= 0");

    volume_ = 1;
    for (int k = 0; k < d; ++k) {
        if (volume_ > (std::int64_t(1) << 30) / side_)
            throw std::invalid_argument("LatticeBox: box too large");
        volume_ *= side_;
    }
    strides_.assign(static_cast<std::size_t>(d), 1);
    for (int k = d - 2; k >= 0; --k)
        strides_[static_cast<std::size_t>(k)] = strides_[static_cast<std::size_t>(k + 1)] * side_;

    // Neighbor table and halo enumeration in one sweep; halo sites are
    // numbered in order of first appearance, so the numbering is
    // deterministic.
    std::map<Coord, std::int64_t> halo_index;
    neighbors_.assign(static_cast<std::size_t>(volume_) * 2 * static_cast<std::size_t>(d), 0);
    site_abs_.assign(static_cast<std::size_t>(volume_), 0.0);

    Coord x(static_cast<std::size_t>(d), -N);
    for (std::int64_t idx = 0; idx < volume_; ++idx) {
        double s2 = 0.0;
        for (int k = 0; k < d; ++k) {
            const double c = x[static_cast<std::size_t>(k)];
            s2 += c * c;
        }
        site_abs_[static_cast<std::size_t>(idx)] = std::sqrt(s2);

        for (int k = 0; k < d; ++k) {
            for (int s = 0; s < 2; ++s) {
                Coord y = x;
                y[static_cast<std::size_t>(k)] += (s == 0 ? 1 : -1);
                std::int64_t padded;
                if (std::abs(y[static_cast<std::size_t>(k)]) <= N) {
                    padded = idx + (s == 0 ? strides_[static_cast<std::size_t>(k)]
                                           : -strides_[static_cast<std::size_t>(k)]);
                } else {
                    auto it = halo_index.find(y);
                    std::int64_t h;
                    if (it == halo_index.end()) {
                        h = static_cast<std::int64_t>(halo_coords_.size());
                        halo_index.emplace(y, h);
                        halo_coords_.push_back(y);
                    } else {
                        h = it->second;
                    }
                    padded = volume_ + h;
                }
                neighbors_[static_cast<std::size_t>(idx) * 2 * static_cast<std::size_t>(d_) +
                           2 * static_cast<std::size_t>(k) + static_cast<std::size_t>(s)] =
                    static_cast<std::uint32_t>(padded);
            }
        }
        for (int k = d - 1; k >= 0; --k) {  // row-major increment, last coordinate fastest
            if (++x[static_cast<std::size_t>(k)] <= N) break;
            x[static_cast<std::size_t>(k)] = -N;
        }
    }

    for (std::int64_t idx = 0; idx < volume_; ++idx) {
        for (int k = 0; k < d; ++k) {
            const std::int64_t fwd = neighbor(idx, 2 * k);
            touching_bonds_.push_back({idx, fwd});
            if (fwd < volume_) interior_bonds_.push_back({idx, fwd});
            const std::int64_t bwd = neighbor(idx, 2 * k + 1);
            if (bwd >= volume_) touching_bonds_.push_back({idx, bwd});  // leaves through the -e_k face
        }
    }

    bulk_row_.assign(static_cast<std::size_t>(rows()), 0);
    for (std::int64_t r = 0; r < rows(); ++r) {
        const Coord x = coord_of(r * side_);
        bool bulk = true;
        for (int k = 0; k + 1 < d_; ++k)
            if (std::abs(x[static_cast<std::size_t>(k)]) >= N_) bulk = false;
        if (d_ == 1) bulk = true;  // the single row; column ends are still handled via the halo
        bulk_row_[static_cast<std::size_t>(r)] = bulk ? 1 : 0;
    }
}

bool LatticeBox::contains(const Coord& x) const {
    if (static_cast<int>(x.size()) != d_) return false;
    for (int v : x)
        if (v < -N_ || v > N_) return false;
    return true;
}

std::int64_t LatticeBox::index_of(const Coord& x) const {
    if (!contains(x)) throw std::invalid_argument("LatticeBox::index_of: site outside box");
    std::int64_t idx = 0;
    for (int k = 0; k < d_; ++k)
        idx += (x[static_cast<std::size_t>(k)] + N_) * strides_[static_cast<std::size_t>(k)];
    return idx;
}

std::int64_t LatticeBox::padded_index_of(const Coord& x) const {
    if (contains(x)) return index_of(x);
    for (std::int64_t h = 0; h < halo_size(); ++h)
        if (halo_coords_[static_cast<std::size_t>(h)] == x) return volume_ + h;
    return -1;
}

Coord LatticeBox::coord_of(std::int64_t idx) const {
    if (idx < 0 || idx >= volume_) throw std::invalid_argument("LatticeBox::coord_of: bad index");
    Coord x(static_cast<std::size_t>(d_), 0);
    for (int k = 0; k < d_; ++k) {
        x[static_cast<std::size_t>(k)] = static_cast<int>(idx / strides_[static_cast<std::size_t>(k)]) - N_;
        idx %= strides_[static_cast<std::size_t>(k)];
    }
    return x;
}

ScalarField::ScalarField(const LatticeBox& b, double fill, double halo_fill)
    : box(&b), data(static_cast<std::size_t>(b.padded_size()), fill) {
    for (std::int64_t h = 0; h < b.halo_size(); ++h)
        data[static_cast<std::size_t>(b.volume() + h)] = halo_fill;
}

void ScalarField::set_halo(double value) {
    for (std::int64_t h = 0; h < box->halo_size(); ++h)
        data[static_cast<std::size_t>(box->volume() + h)] = value;
}

double ScalarField::at(const Coord& x) const {
    const std::int64_t p = box->padded_index_of(x);
    if (p < 0) throw std::invalid_argument("ScalarField::at: site neither in box nor halo");
    return data[static_cast<std::size_t>(p)];
}

double laplacian(const ScalarField& f, std::int64_t site) {
    const LatticeBox& box = *f.box;
    const int twod = 2 * box.dim();
    const std::uint32_t* nb = box.neighbor_table().data() + site * twod;
    double acc = 0.0;
    for (int k = 0; k < twod; ++k) acc += f.data[nb[k]];
    return acc - twod * f.data[static_cast<std::size_t>(site)];
}

double laplacian(const ScalarField& f, const Coord& x) {
    if (!f.box->contains(x)) throw std::invalid_argument("laplacian: site outside box");
    return laplacian(f, f.box->index_of(x));
}

double gradient(const ScalarField& f, const Bond& b) {
    int dist = 0;
    if (b.x.size() != b.y.size()) throw std::invalid_argument("gradient: malformed bond");
    for (std::size_t k = 0; k < b.x.size(); ++k) dist += std::abs(b.x[k] - b.y[k]);
    if (dist != 1) throw std::invalid_argument("gradient: bond endpoints not adjacent");
    return f.at(b.x) - f.at(b.y);
}

double weighted_norm_sq(const ScalarField& phi1, const ScalarField& phi2, double r) {
    if (r <= 0.0) throw std::invalid_argument("weighted_norm: r must be positive");
    const LatticeBox& box = *phi1.box;
    double acc = 0.0;
    for (std::int64_t i = 0; i < box.volume(); ++i) {
        const double w = std::exp(-2.0 * r * box.site_abs(i));
        acc += w * (phi1[i] * phi1[i] + phi2[i] * phi2[i]);
    }
    return acc;
}

double weighted_norm(const ScalarField& phi1, const ScalarField& phi2, double r) {
    return std::sqrt(weighted_norm_sq(phi1, phi2, r));
}

}  // namespace tli
