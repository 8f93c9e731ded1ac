#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace b2b {

enum class BusKind { source, load };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::load;
    double p_kw = 0.0;
    double q_kvar = 0.0;
};

struct Line {
    int from = 0;
    int to = 0;
    double r_ohm = 0.0;
    double x_ohm = 0.0;
    double length_km = 0.0;
};

/// Dense row-major square matrix indexed by bus position.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    std::size_t rows() const noexcept { return n_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Radial single-phase-equivalent feeder. Validated on construction: one
/// source bus, lines form a spanning tree, no self-loops or parallel lines.
class FeederNetwork {
public:
    FeederNetwork(std::vector<Bus> buses, std::vector<Line> lines, double base_kv, double source_voltage_pu = 1.0);

    const std::vector<Bus>& buses() const noexcept { return buses_; }
    const std::vector<Line>& lines() const noexcept { return lines_; }
    double base_kv() const noexcept { return base_kv_; }
    double source_voltage_pu() const noexcept { return source_voltage_pu_; }
    std::size_t n_node() const noexcept { return buses_.size(); }

    /// Position of a bus id in `buses()`; throws InvalidArgument when unknown.
    std::size_t index_of(int bus_id) const;
    bool has_bus(int bus_id) const noexcept { return index_.contains(bus_id); }
    std::size_t source_index() const noexcept { return source_; }

    /// Tree structure rooted at the source, by bus position.
    const std::vector<std::size_t>& bfs_order() const noexcept { return order_; }
    /// Parent position of each bus; the source is its own parent.
    const std::vector<std::size_t>& parent() const noexcept { return parent_; }
    /// Line index joining each bus to its parent (unused for the source).
    const std::vector<std::size_t>& parent_line() const noexcept { return parent_line_; }
    /// Path length from the source, km.
    const std::vector<double>& depth_km() const noexcept { return depth_km_; }
    const std::vector<std::size_t>& level() const noexcept { return level_; }

    /// Copy with bus `index` loaded by an extra (dp_kw, dq_kvar).
    FeederNetwork with_extra_load(std::size_t index, double dp_kw, double dq_kvar) const;
    /// Copy with every line impedance multiplied by `factor`.
    FeederNetwork with_scaled_impedance(double factor) const;
    /// Copy with each bus load replaced.
    FeederNetwork with_loads(const std::vector<double>& p_kw, const std::vector<double>& q_kvar) const;

    double total_load_kw() const noexcept;

private:
    std::vector<Bus> buses_;
    std::vector<Line> lines_;
    double base_kv_;
    double source_voltage_pu_;
    std::unordered_map<int, std::size_t> index_;
    std::size_t source_ = 0;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> parent_line_;
    std::vector<double> depth_km_;
    std::vector<std::size_t> level_;
};

struct PowerFlowOptions {
    double base_mva = 1.0;
    /// Converged when every bus's power mismatch is below this, per-unit.
    double tolerance_pu = 1e-6;
    int max_iterations = 100;
};

struct PowerFlowSolution {
    std::vector<double> v_pu;
    std::vector<double> angle_rad;
    bool converged = false;
    int iterations = 0;
    double max_mismatch_kw = 0.0;
};

struct SensitivityMatrices {
    std::vector<int> bus_ids;
    Matrix vlsmp;  // (a, b) = dV_a / dP_b, pu per kW, load-increase convention
    Matrix vlsmq;  // pu per kvar
};

struct VlsmOptions {
    double delta_p_kw = 1.0;
    double delta_q_kvar = 1.0;
    PowerFlowOptions flow{1.0, 1e-11, 200};
};

FeederNetwork load_network_json(const std::filesystem::path& path);
FeederNetwork parse_network_json(std::istream& in);
FeederNetwork parse_network_json_text(const std::string& text);
std::string network_to_json(const FeederNetwork& net);

/// Forward-backward sweep from a flat start with constant-power loads.
PowerFlowSolution solve_power_flow(const FeederNetwork& net, const PowerFlowOptions& opts = {});

/// Finite-difference sensitivities: one perturbed solve per non-source bus.
/// Throws NumericalError naming the bus if any solve fails to converge.
SensitivityMatrices compute_vlsm(const FeederNetwork& net, const VlsmOptions& opts = {});

/// Sum of line lengths along the tree path between two buses, km.
double electrical_distance(const FeederNetwork& net, int bus_a, int bus_b);

/// Sum over all buses a of |VLSMP(a, l)|.
double column_sensitivity_sum(const SensitivityMatrices& m, int bus_l);

void write_matrix_csv(const SensitivityMatrices& m, const Matrix& which, std::ostream& out);

std::string to_string(BusKind kind);

}  // namespace b2b
