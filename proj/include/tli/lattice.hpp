#ifndef TLI_LATTICE_HPP
#define TLI_LATTICE_HPP

#include <cstdint>
#include <vector>

namespace tli {

using Coord = std::vector<int>;

// Directed bond b = (x, y), |x - y| = 1.  The gradient convention is
// grad(f, b) = f(x) - f(y).
struct Bond {
    Coord x;
    Coord y;
};

// The box Lambda_N = [-N, N]^d intersected with Z^d.  Sites are addressed by
// a row-major flat index (last coordinate fastest), so site 0 is (-N,...,-N)
// and site volume()-1 is (N,...,N).  Sites just outside the box (the halo)
// are appended after the box sites in field storage, which makes the
// Laplacian gather branch-free.
class LatticeBox {
  public:
    LatticeBox(int d, int N);

    int dim() const { return d_; }
    int halfwidth() const { return N_; }
    int side() const { return side_; }
    std::int64_t volume() const { return volume_; }
    std::int64_t halo_size() const { return static_cast<std::int64_t>(halo_coords_.size()); }
    std::int64_t padded_size() const { return volume_ + halo_size(); }

    bool contains(const Coord& x) const;
    std::int64_t index_of(const Coord& x) const;  // box sites only
    Coord coord_of(std::int64_t idx) const;
    Coord halo_coord_of(std::int64_t h) const { return halo_coords_[static_cast<std::size_t>(h)]; }
    // padded index of an arbitrary box-or-halo site, -1 if representable by neither
    std::int64_t padded_index_of(const Coord& x) const;

    // Neighbor table: padded indices, 2d entries per site in the order
    // (+e0, -e0, +e1, -e1, ...).
    const std::vector<std::uint32_t>& neighbor_table() const { return neighbors_; }
    std::int64_t neighbor(std::int64_t site, int k) const {
        return neighbors_[static_cast<std::size_t>(site) * 2 * d_ + static_cast<std::size_t>(k)];
    }

    // Undirected bonds (each geometric bond once), endpoints as padded
    // indices.  interior_bonds() is Lambda^* (both endpoints inside);
    // touching_bonds() additionally has the bonds leaving the box.
    struct FlatBond {
        std::int64_t a;
        std::int64_t b;
    };
    const std::vector<FlatBond>& interior_bonds() const { return interior_bonds_; }
    const std::vector<FlatBond>& touching_bonds() const { return touching_bonds_; }

    // Euclidean |x|, used by the weighted norms.
    double site_abs(std::int64_t idx) const { return site_abs_[static_cast<std::size_t>(idx)]; }

    // Row view: a row is a run of `side` sites along the last coordinate.
    // Bulk rows have every outer coordinate strictly inside the box, so all
    // cross-row neighbors are plain +-stride offsets.
    std::int64_t rows() const { return volume_ / side_; }
    bool row_is_bulk(std::int64_t row) const { return bulk_row_[static_cast<std::size_t>(row)] != 0; }
    const std::vector<std::int64_t>& strides() const { return strides_; }

  private:
    int d_;
    int N_;
    int side_;
    std::int64_t volume_;
    std::vector<std::int64_t> strides_;
    std::vector<std::uint32_t> neighbors_;
    std::vector<Coord> halo_coords_;
    std::vector<FlatBond> interior_bonds_;
    std::vector<FlatBond> touching_bonds_;
    std::vector<double> site_abs_;
    std::vector<std::uint8_t> bulk_row_;
};

// Heights on a box plus prescribed (frozen) values on the halo sites.  The
// halo tail of data defaults to zero, matching the zero boundary condition
// used by the experiments.
struct ScalarField {
    explicit ScalarField(const LatticeBox& box, double fill = 0.0, double halo_fill = 0.0);

    const LatticeBox* box;
    std::vector<double> data;  // volume() box values then halo_size() frozen values

    double at(const Coord& x) const;
    double operator[](std::int64_t site) const { return data[static_cast<std::size_t>(site)]; }
    double& operator[](std::int64_t site) { return data[static_cast<std::size_t>(site)]; }
    double halo_at(std::int64_t h) const { return data[static_cast<std::size_t>(box->volume() + h)]; }
    void set_halo(double value);
};

// Discrete Laplacian: sum_{|y-x|=1} (f(y) - f(x)).  x must be a box site.
double laplacian(const ScalarField& f, const Coord& x);
double laplacian(const ScalarField& f, std::int64_t site);

// grad f(b) = f(x_b) - f(y_b).
double gradient(const ScalarField& f, const Bond& b);

// ||Phi||_r^2 = sum_{i=1,2} sum_x |phi_i(x)|^2 exp(-2r|x|) over box sites.
double weighted_norm_sq(const ScalarField& phi1, const ScalarField& phi2, double r);
double weighted_norm(const ScalarField& phi1, const ScalarField& phi2, double r);

}  // namespace tli

#endif
