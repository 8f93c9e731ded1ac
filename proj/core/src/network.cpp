#include "b2bplan/network.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "b2bplan/error.hpp"
#include "b2bplan/format.hpp"

namespace b2b {

using cplx = std::complex<double>;
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

FeederNetwork::FeederNetwork(std::vector<Bus> buses, std::vector<Line> lines, double base_kv,
                             double source_voltage_pu)
    : buses_(std::move(buses)), lines_(std::move(lines)), base_kv_(base_kv), source_voltage_pu_(source_voltage_pu) {
    if (buses_.empty()) throw InvalidArgument("network has no buses");
    if (!(base_kv_ > 0.0)) throw InvalidArgument("base_kv must be positive");
    if (!(source_voltage_pu_ > 0.0)) throw InvalidArgument("source_voltage_pu must be positive");

    std::size_t sources = 0;
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        const auto& b = buses_[i];
        if (!index_.emplace(b.id, i).second) throw InvalidArgument("duplicate bus id " + std::to_string(b.id));
        if (!std::isfinite(b.p_kw) || !std::isfinite(b.q_kvar)) {
            throw InvalidArgument("bus " + std::to_string(b.id) + " has a non-finite load");
        }
        if (b.kind == BusKind::source) {
            ++sources;
            source_ = i;
        }
    }
    if (sources == 0) throw InvalidArgument("network has no source bus");
    if (sources > 1) throw InvalidArgument("network has " + std::to_string(sources) + " source buses; exactly one required");

    const std::size_t n = buses_.size();
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);  // (neighbour, line)
    std::set<std::pair<int, int>> seen;
    for (std::size_t k = 0; k < lines_.size(); ++k) {
        const auto& l = lines_[k];
        const std::string name = "line " + std::to_string(l.from) + "-" + std::to_string(l.to);
        if (!index_.contains(l.from) || !index_.contains(l.to)) throw InvalidArgument(name + " references an unknown bus");
        if (l.from == l.to) throw InvalidArgument(name + " is a self-loop");
        if (l.r_ohm < 0.0 || l.x_ohm < 0.0) throw InvalidArgument(name + " has a negative impedance");
        if (l.r_ohm == 0.0 && l.x_ohm == 0.0) throw InvalidArgument(name + " has zero impedance");
        if (!(l.length_km > 0.0)) throw InvalidArgument(name + " must have positive length");
        if (!seen.emplace(std::minmax(l.from, l.to)).second) throw InvalidArgument(name + " is a parallel line");
        const auto a = index_.at(l.from);
        const auto b = index_.at(l.to);
        adj[a].emplace_back(b, k);
        adj[b].emplace_back(a, k);
    }

    parent_.assign(n, kNone);
    parent_line_.assign(n, kNone);
    depth_km_.assign(n, 0.0);
    level_.assign(n, 0);
    parent_[source_] = source_;
    std::queue<std::size_t> q;
    q.push(source_);
    while (!q.empty()) {
        const auto u = q.front();
        q.pop();
        order_.push_back(u);
        // Neighbour order follows line order, so the BFS is deterministic.
        for (auto [v, k] : adj[u]) {
            if (k == parent_line_[u]) continue;
            if (parent_[v] != kNone) {
                throw InvalidArgument("cycle detected: network is not radial (closing line " +
                                      std::to_string(lines_[k].from) + "-" + std::to_string(lines_[k].to) + ")");
            }
            parent_[v] = u;
            parent_line_[v] = k;
            depth_km_[v] = depth_km_[u] + lines_[k].length_km;
            level_[v] = level_[u] + 1;
            q.push(v);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (parent_[i] == kNone) {
            throw InvalidArgument("bus " + std::to_string(buses_[i].id) + " is disconnected from the source");
        }
    }
}

std::size_t FeederNetwork::index_of(int bus_id) const {
    auto it = index_.find(bus_id);
    if (it == index_.end()) throw InvalidArgument("unknown bus id " + std::to_string(bus_id));
    return it->second;
}

FeederNetwork FeederNetwork::with_extra_load(std::size_t index, double dp_kw, double dq_kvar) const {
    auto buses = buses_;
    buses.at(index).p_kw += dp_kw;
    buses.at(index).q_kvar += dq_kvar;
    return FeederNetwork(std::move(buses), lines_, base_kv_, source_voltage_pu_);
}

FeederNetwork FeederNetwork::with_scaled_impedance(double factor) const {
    auto lines = lines_;
    for (auto& l : lines) {
        l.r_ohm *= factor;
        l.x_ohm *= factor;
    }
    return FeederNetwork(buses_, std::move(lines), base_kv_, source_voltage_pu_);
}

FeederNetwork FeederNetwork::with_loads(const std::vector<double>& p_kw, const std::vector<double>& q_kvar) const {
    if (p_kw.size() != buses_.size() || q_kvar.size() != buses_.size()) {
        throw InvalidArgument("load vectors must have one entry per bus");
    }
    auto buses = buses_;
    for (std::size_t i = 0; i < buses.size(); ++i) {
        buses[i].p_kw = p_kw[i];
        buses[i].q_kvar = q_kvar[i];
    }
    return FeederNetwork(std::move(buses), lines_, base_kv_, source_voltage_pu_);
}

double FeederNetwork::total_load_kw() const noexcept {
    double sum = 0.0;
    for (const auto& b : buses_) {
        if (b.kind == BusKind::load) sum += b.p_kw;
    }
    return sum;
}

FeederNetwork parse_network_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("network JSON: ") + e.what());
    }
    try {
        std::vector<Bus> buses;
        for (const auto& jb : j.at("buses")) {
            Bus b;
            b.id = jb.at("id").get<int>();
            const auto kind = jb.at("kind").get<std::string>();
            if (kind == "source") {
                b.kind = BusKind::source;
            } else if (kind == "load") {
                b.kind = BusKind::load;
            } else {
                throw ParseError("bus " + std::to_string(b.id) + " has unknown kind '" + kind + "'");
            }
            b.p_kw = jb.value("p_kw", 0.0);
            b.q_kvar = jb.value("q_kvar", 0.0);
            buses.push_back(b);
        }
        std::vector<Line> lines;
        for (const auto& jl : j.at("lines")) {
            lines.push_back(Line{jl.at("from").get<int>(), jl.at("to").get<int>(), jl.at("r_ohm").get<double>(),
                                 jl.at("x_ohm").get<double>(), jl.at("length_km").get<double>()});
        }
        return FeederNetwork(std::move(buses), std::move(lines), j.at("base_kv").get<double>(),
                             j.value("source_voltage_pu", 1.0));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("network JSON: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("network JSON: ") + e.what());
    }
}

FeederNetwork parse_network_json(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_network_json_text(ss.str());
}

FeederNetwork load_network_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open network JSON " + path.string());
    try {
        return parse_network_json(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string network_to_json(const FeederNetwork& net) {
    nlohmann::ordered_json j;
    j["base_kv"] = net.base_kv();
    j["source_voltage_pu"] = net.source_voltage_pu();
    j["buses"] = nlohmann::ordered_json::array();
    for (const auto& b : net.buses()) {
        j["buses"].push_back({{"id", b.id}, {"kind", to_string(b.kind)}, {"p_kw", b.p_kw}, {"q_kvar", b.q_kvar}});
    }
    j["lines"] = nlohmann::ordered_json::array();
    for (const auto& l : net.lines()) {
        j["lines"].push_back({{"from", l.from}, {"to", l.to}, {"r_ohm", l.r_ohm}, {"x_ohm", l.x_ohm},
                              {"length_km", l.length_km}});
    }
    return j.dump(2);
}

PowerFlowSolution solve_power_flow(const FeederNetwork& net, const PowerFlowOptions& opts) {
    const std::size_t n = net.n_node();
    const auto& order = net.bfs_order();
    const auto& parent = net.parent();
    const auto& pline = net.parent_line();
    const std::size_t src = net.source_index();

    const double z_base = net.base_kv() * net.base_kv() / opts.base_mva;
    std::vector<cplx> z(n, cplx{});
    std::vector<cplx> s(n, cplx{});
    for (std::size_t i = 0; i < n; ++i) {
        if (i == src) continue;
        const auto& l = net.lines()[pline[i]];
        z[i] = cplx(l.r_ohm, l.x_ohm) / z_base;
        const auto& b = net.buses()[i];
        s[i] = cplx(b.p_kw, b.q_kvar) / (1000.0 * opts.base_mva);
    }

    std::vector<cplx> v(n, cplx(net.source_voltage_pu(), 0.0));
    std::vector<cplx> i_load(n, cplx{});
    std::vector<cplx> i_branch(n, cplx{});

    PowerFlowSolution sol;
    double mismatch = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opts.max_iterations; ++it) {
        for (std::size_t k = 0; k < n; ++k) i_load[k] = (k == src) ? cplx{} : std::conj(s[k] / v[k]);
        i_branch = i_load;
        for (auto it_rev = order.rbegin(); it_rev != order.rend(); ++it_rev) {
            const auto k = *it_rev;
            if (k != src) i_branch[parent[k]] += i_branch[k];
        }
        for (const auto k : order) {
            if (k != src) v[k] = v[parent[k]] - z[k] * i_branch[k];
        }
        mismatch = 0.0;
        bool finite = true;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == src) continue;
            if (!std::isfinite(v[k].real()) || !std::isfinite(v[k].imag()) || std::abs(v[k]) < 1e-6) {
                finite = false;
                break;
            }
            mismatch = std::max(mismatch, std::abs(v[k] * std::conj(i_load[k]) - s[k]));
        }
        sol.iterations = it;
        if (!finite) {
            mismatch = std::numeric_limits<double>::infinity();
            break;
        }
        if (mismatch < opts.tolerance_pu) {
            sol.converged = true;
            break;
        }
    }

    sol.max_mismatch_kw = mismatch * 1000.0 * opts.base_mva;
    sol.v_pu.resize(n);
    sol.angle_rad.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        sol.v_pu[k] = std::abs(v[k]);
        sol.angle_rad[k] = std::arg(v[k]);
    }
    sol.v_pu[src] = net.source_voltage_pu();
    return sol;
}

SensitivityMatrices compute_vlsm(const FeederNetwork& net, const VlsmOptions& opts) {
    if (!(opts.delta_p_kw != 0.0) || !(opts.delta_q_kvar != 0.0)) {
        throw InvalidArgument("perturbation sizes must be nonzero");
    }
    const std::size_t n = net.n_node();
    const auto base = solve_power_flow(net, opts.flow);
    if (!base.converged) throw NumericalError("base power flow did not converge");

    SensitivityMatrices m;
    m.bus_ids.reserve(n);
    for (const auto& b : net.buses()) m.bus_ids.push_back(b.id);
    m.vlsmp = Matrix(n);
    m.vlsmq = Matrix(n);

    for (std::size_t b = 0; b < n; ++b) {
        if (b == net.source_index()) continue;
        const auto dp = solve_power_flow(net.with_extra_load(b, opts.delta_p_kw, 0.0), opts.flow);
        if (!dp.converged) {
            throw NumericalError("perturbed power flow (P) did not converge at bus " + std::to_string(net.buses()[b].id));
        }
        const auto dq = solve_power_flow(net.with_extra_load(b, 0.0, opts.delta_q_kvar), opts.flow);
        if (!dq.converged) {
            throw NumericalError("perturbed power flow (Q) did not converge at bus " + std::to_string(net.buses()[b].id));
        }
        for (std::size_t a = 0; a < n; ++a) {
            if (a == net.source_index()) continue;
            m.vlsmp(a, b) = (dp.v_pu[a] - base.v_pu[a]) / opts.delta_p_kw;
            m.vlsmq(a, b) = (dq.v_pu[a] - base.v_pu[a]) / opts.delta_q_kvar;
        }
    }
    return m;
}

double electrical_distance(const FeederNetwork& net, int bus_a, int bus_b) {
    auto a = net.index_of(bus_a);
    auto b = net.index_of(bus_b);
    const auto& parent = net.parent();
    const auto& level = net.level();
    const auto& depth = net.depth_km();
    const double da = depth[a];
    const double db = depth[b];
    while (level[a] > level[b]) a = parent[a];
    while (level[b] > level[a]) b = parent[b];
    while (a != b) {
        a = parent[a];
        b = parent[b];
    }
    return da + db - 2.0 * depth[a];
}

double column_sensitivity_sum(const SensitivityMatrices& m, int bus_l) {
    const auto it = std::find(m.bus_ids.begin(), m.bus_ids.end(), bus_l);
    if (it == m.bus_ids.end()) throw InvalidArgument("unknown bus id " + std::to_string(bus_l));
    const auto col = static_cast<std::size_t>(it - m.bus_ids.begin());
    double sum = 0.0;
    for (std::size_t a = 0; a < m.vlsmp.rows(); ++a) sum += std::abs(m.vlsmp(a, col));
    return sum;
}

void write_matrix_csv(const SensitivityMatrices& m, const Matrix& which, std::ostream& out) {
    out << "bus";
    for (int id : m.bus_ids) out << ',' << id;
    out << '\n';
    for (std::size_t r = 0; r < which.rows(); ++r) {
        out << m.bus_ids[r];
        for (std::size_t c = 0; c < which.rows(); ++c) out << ',' << format_number(which(r, c));
        out << '\n';
    }
}

std::string to_string(BusKind kind) { return kind == BusKind::source ? "source" : "load"; }

}  // namespace b2b
