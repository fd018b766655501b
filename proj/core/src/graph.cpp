#include "specaug/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace specaug {

int Graph::edge_count() const {
    int m = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (adjacency(i, j) != 0.0) ++m;
    return m;
}

bool Graph::is_binary(double tol) const {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double a = adjacency(i, j);
            if (std::abs(a) > tol && std::abs(a - 1.0) > tol) return false;
        }
    return true;
}

void Graph::validate() const {
    if (adjacency.rows() != n || adjacency.cols() != n)
        throw std::invalid_argument("adjacency shape does not match n");
    for (int i = 0; i < n; ++i) {
        if (adjacency(i, i) != 0.0)
            throw std::invalid_argument("nonzero diagonal entry in adjacency");
        for (int j = 0; j < n; ++j) {
            if (adjacency(i, j) != adjacency(j, i))
                throw std::invalid_argument("adjacency not symmetric");
            if (adjacency(i, j) < 0.0 || adjacency(i, j) > 1.0)
                throw std::invalid_argument("adjacency entry outside [0,1]");
        }
    }
}

Graph make_graph(int n, const std::vector<std::pair<int, int>>& edges,
                 LoadStats* stats) {
    if (n < 0) throw std::invalid_argument("negative node count");
    Graph g;
    g.n = n;
    g.adjacency = Matrix::Zero(n, n);
    LoadStats local;
    for (auto [i, j] : edges) {
        if (i < 0 || j < 0 || i >= n || j >= n)
            throw std::out_of_range("edge endpoint out of range");
        if (i == j) {
            ++local.self_loops_dropped;
            continue;
        }
        if (g.adjacency(i, j) != 0.0) {
            ++local.duplicates_merged;
            continue;
        }
        g.adjacency(i, j) = 1.0;
        g.adjacency(j, i) = 1.0;
    }
    if (stats) *stats = local;
    return g;
}

Graph load_graph(const std::string& path, int n, LoadStats* stats) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list: " + path);
    std::vector<std::pair<int, int>> edges;
    std::string line;
    int lineno = 0;
    int max_id = -1;
    while (std::getline(in, line)) {
        ++lineno;
        // strip comments and blank lines
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ss(line);
        long long src, dst;
        if (!(ss >> src)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;  // blank
            throw std::runtime_error("malformed edge list line " +
                                     std::to_string(lineno) + " in " + path);
        }
        double w;
        if (!(ss >> dst)) {
            throw std::runtime_error("malformed edge list line " +
                                     std::to_string(lineno) + " in " + path);
        }
        ss >> w;  // optional weight, ignored for binary graphs
        std::string trailing;
        if (ss >> trailing)
            throw std::runtime_error("malformed edge list line " +
                                     std::to_string(lineno) + " in " + path);
        if (src < 0 || dst < 0)
            throw std::runtime_error("negative node id at line " +
                                     std::to_string(lineno) + " in " + path);
        if (n >= 0 && (src >= n || dst >= n))
            throw std::out_of_range("node id >= declared n at line " +
                                    std::to_string(lineno) + " in " + path);
        max_id = std::max<long long>(max_id, std::max(src, dst));
        edges.emplace_back(static_cast<int>(src), static_cast<int>(dst));
    }
    int count = (n >= 0) ? n : max_id + 1;
    return make_graph(count, edges, stats);
}

void save_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write edge list: " + path);
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.adjacency(i, j) != 0.0) out << i << " " << j << "\n";
}

Vector degrees(const Graph& g) { return g.adjacency.rowwise().sum(); }

ComplementDirection complement_direction(const Graph& g) {
    if (!g.is_binary())
        throw std::domain_error("complement_direction requires binary adjacency");
    Matrix c = Matrix::Ones(g.n, g.n) - Matrix::Identity(g.n, g.n) -
               2.0 * g.adjacency;
    c.diagonal().setZero();
    return {c};
}

Matrix normalized_laplacian(const Matrix& adjacency, double degree_floor) {
    const int n = static_cast<int>(adjacency.rows());
    Vector d = adjacency.rowwise().sum();
    Vector s(n);
    for (int i = 0; i < n; ++i)
        s(i) = 1.0 / std::sqrt(std::max(d(i), degree_floor));
    Matrix l = Matrix::Identity(n, n) -
               s.asDiagonal() * adjacency * s.asDiagonal();
    l = 0.5 * (l + l.transpose()).eval();  // exact symmetry
    return l;
}

Matrix normalized_laplacian(const Graph& g, double degree_floor) {
    return normalized_laplacian(g.adjacency, degree_floor);
}

Matrix unnormalized_laplacian(const Graph& g) {
    Matrix l = -g.adjacency;
    l.diagonal() = degrees(g);
    return l;
}

Graph apply_perturbation(const Graph& g, const ComplementDirection& c,
                         const PerturbationSample& e) {
    if (c.c.rows() != g.n || e.e.rows() != g.n)
        throw std::invalid_argument("shape mismatch in apply_perturbation");
    Graph out = g;
    out.adjacency = g.adjacency + c.c.cwiseProduct(e.e);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            double a = out.adjacency(i, j);
            if (a != 0.0 && a != 1.0)
                throw std::logic_error("perturbed adjacency left {0,1}");
        }
    return out;
}

Matrix expected_view(const Graph& g, const ComplementDirection& c,
                     const Matrix& delta) {
    if (c.c.rows() != g.n || delta.rows() != g.n)
        throw std::invalid_argument("shape mismatch in expected_view");
    return g.adjacency + c.c.cwiseProduct(delta);
}

Graph generate_sbm(int n, int k, double p_in, double p_out, std::uint64_t seed) {
    if (k > n) throw std::invalid_argument("sbm: k > n");
    if (!(0.0 <= p_out && p_out < p_in && p_in <= 1.0))
        throw std::invalid_argument("sbm requires 0 <= p_out < p_in <= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = i % k;  // balanced blocks
    Graph g;
    g.n = n;
    g.adjacency = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double p = (labels[i] == labels[j]) ? p_in : p_out;
            if (unif(rng) < p) {
                g.adjacency(i, j) = 1.0;
                g.adjacency(j, i) = 1.0;
            }
        }
    g.node_labels = labels;
    return g;
}

Graph generate_random_geometric(int n, double radius, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix pos(n, 2);
    for (int i = 0; i < n; ++i) {
        pos(i, 0) = unif(rng);
        pos(i, 1) = unif(rng);
    }
    Graph g;
    g.n = n;
    g.adjacency = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double dx = pos(i, 0) - pos(j, 0);
            double dy = pos(i, 1) - pos(j, 1);
            if (std::sqrt(dx * dx + dy * dy) <= radius) {
                g.adjacency(i, j) = 1.0;
                g.adjacency(j, i) = 1.0;
            }
        }
    g.positions = pos;
    return g;
}

}  // namespace specaug
