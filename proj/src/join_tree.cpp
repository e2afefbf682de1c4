#include "joininfer/join_tree.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace joininfer {

bool JoinGraph::has_node(std::string_view name) const {
    return std::binary_search(nodes.begin(), nodes.end(), name);
}

namespace {

void sort_edges(JoinGraph& graph) {
    std::sort(graph.edges.begin(), graph.edges.end(), [](const JoinEdge& a, const JoinEdge& b) {
        return std::tie(a.from, a.to, a.synthetic, a.ind_id) < std::tie(b.from, b.to, b.synthetic, b.ind_id);
    });
}

// Outgoing edge indexes per node, in edge order (sorted by target).
std::map<std::string, std::vector<size_t>> adjacency(const JoinGraph& graph, bool real_only) {
    std::map<std::string, std::vector<size_t>> adj;
    for (size_t i = 0; i < graph.edges.size(); ++i) {
        if (real_only && graph.edges[i].synthetic) continue;
        adj[graph.edges[i].from].push_back(i);
    }
    return adj;
}

std::string describe_cycle(const JoinGraph& graph, const std::vector<size_t>& cycle) {
    std::string out = graph.edges[cycle.front()].from;
    for (size_t i : cycle) out += " -> " + graph.edges[i].to;
    return out;
}

// First directed cycle found by DFS over real edges, as edge indexes.
std::optional<std::vector<size_t>> find_cycle(const JoinGraph& graph) {
    const auto adj = adjacency(graph, true);
    std::map<std::string, int> color;  // 0 white, 1 on stack, 2 done
    std::vector<size_t> stack;         // edges on the current DFS path
    std::optional<std::vector<size_t>> found;

    std::function<bool(const std::string&)> visit = [&](const std::string& node) {
        color[node] = 1;
        if (auto it = adj.find(node); it != adj.end()) {
            for (size_t e : it->second) {
                const std::string& next = graph.edges[e].to;
                if (color[next] == 1) {
                    std::vector<size_t> cycle;
                    auto start = std::find_if(stack.begin(), stack.end(),
                                              [&](size_t s) { return graph.edges[s].from == next; });
                    cycle.assign(start, stack.end());
                    cycle.push_back(e);
                    found = std::move(cycle);
                    return true;
                }
                if (color[next] == 0) {
                    stack.push_back(e);
                    if (visit(next)) return true;
                    stack.pop_back();
                }
            }
        }
        color[node] = 2;
        return false;
    };
    for (const auto& node : graph.nodes) {
        if (color[node] == 0 && visit(node)) break;
    }
    return found;
}

double path_product(const JoinGraph& graph, const std::vector<size_t>& path) {
    double p = 1.0;
    for (size_t e : path) p *= graph.edges[e].score;
    return p;
}

}  // namespace

JoinGraph build_join_graph(std::span<const std::string> tables, std::span<const InclusionDependency> inds) {
    JoinGraph graph;
    graph.nodes.assign(tables.begin(), tables.end());
    std::sort(graph.nodes.begin(), graph.nodes.end());
    graph.nodes.erase(std::unique(graph.nodes.begin(), graph.nodes.end()), graph.nodes.end());
    for (const auto& ind : inds) {
        if (!is_active(ind.status) || !ind.default_edge) continue;
        if (ind.fk.table == ind.pk.table) {
            graph.warnings.push_back("self-referencing join " + ind.id() + " left out of join paths");
            continue;
        }
        if (!graph.has_node(ind.fk.table) || !graph.has_node(ind.pk.table)) {
            graph.warnings.push_back("join " + ind.id() + " references a table outside the catalog");
            continue;
        }
        graph.edges.push_back({ind.fk.table, ind.pk.table, ind.score, false, ind.id()});
    }
    sort_edges(graph);
    return graph;
}

size_t break_cycles(JoinGraph& graph) {
    size_t dropped = 0;
    while (auto cycle = find_cycle(graph)) {
        size_t victim = cycle->front();
        for (size_t e : *cycle) {
            const auto& a = graph.edges[e];
            const auto& b = graph.edges[victim];
            if (a.score < b.score || (a.score == b.score && a.ind_id > b.ind_id)) victim = e;
        }
        graph.warnings.push_back("cycle " + describe_cycle(graph, *cycle) + " broken by dropping " +
                                 graph.edges[victim].ind_id);
        graph.edges.erase(graph.edges.begin() + static_cast<std::ptrdiff_t>(victim));
        ++dropped;
    }
    return dropped;
}

size_t detect_blackholes(JoinGraph& graph, size_t min_in_degree) {
    std::map<std::string, size_t> in_degree, out_degree;
    for (const auto& e : graph.edges) {
        ++out_degree[e.from];
        ++in_degree[e.to];
    }
    std::vector<JoinEdge> added;
    for (const auto& e : graph.edges) {
        if (e.synthetic || out_degree[e.to] != 0 || in_degree[e.to] < min_in_degree) continue;
        added.push_back({e.to, e.from, e.score, true, e.ind_id});
    }
    graph.edges.insert(graph.edges.end(), added.begin(), added.end());
    sort_edges(graph);
    return added.size();
}

std::vector<std::vector<size_t>> enumerate_simple_paths(const JoinGraph& graph, const std::string& from,
                                                        const std::string& to, size_t max_hops,
                                                        const std::set<size_t>& discarded, bool* truncated) {
    std::vector<std::vector<size_t>> out;
    if (truncated != nullptr) *truncated = false;
    if (from == to) return out;
    const auto adj = adjacency(graph, false);
    std::set<std::string> on_path{from};
    std::vector<size_t> path;

    std::function<void(const std::string&)> walk = [&](const std::string& node) {
        auto it = adj.find(node);
        if (it == adj.end()) return;
        for (size_t e : it->second) {
            if (discarded.count(e) != 0) continue;
            const std::string& next = graph.edges[e].to;
            if (on_path.count(next) != 0) continue;
            if (path.size() == max_hops) {
                if (truncated != nullptr) *truncated = true;
                return;
            }
            path.push_back(e);
            if (next == to) {
                out.push_back(path);
            } else {
                on_path.insert(next);
                walk(next);
                on_path.erase(next);
            }
            path.pop_back();
        }
    };
    walk(from);
    return out;
}

std::optional<size_t> longest_path_length(const JoinGraph& graph, const std::string& from, const std::string& to,
                                          size_t max_hops) {
    if (from == to) return 0;
    std::optional<size_t> best;
    for (const auto& p : enumerate_simple_paths(graph, from, to, max_hops)) {
        if (!best || p.size() > *best) best = p.size();
    }
    return best;
}

std::vector<std::string> rank_roots(const JoinGraph& graph) {
    std::map<std::string, size_t> real_out;
    std::set<std::string> has_out;
    for (const auto& e : graph.edges) {
        has_out.insert(e.from);
        if (!e.synthetic) ++real_out[e.from];
    }
    std::vector<std::string> roots(has_out.begin(), has_out.end());
    std::stable_sort(roots.begin(), roots.end(), [&](const std::string& a, const std::string& b) {
        return real_out[a] > real_out[b];
    });
    return roots;
}

JoinPlan generate_join_paths(JoinGraph graph, const JoinTreeConfig& config) {
    JoinPlan plan;
    break_cycles(graph);
    detect_blackholes(graph, config.blackhole_min_in_degree);
    plan.warnings = graph.warnings;

    for (const auto& root : rank_roots(graph)) {
        JoinTree tree{root, {}};
        std::map<std::string, std::optional<size_t>> parent{{root, std::nullopt}};
        std::set<size_t> discarded;

        std::vector<std::pair<size_t, std::string>> dims;
        for (const auto& node : graph.nodes) {
            if (node == root) continue;
            if (auto len = longest_path_length(graph, root, node, config.max_hops)) dims.emplace_back(*len, node);
        }
        std::sort(dims.begin(), dims.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });

        for (const auto& [len, dim] : dims) {
            if (parent.count(dim) != 0) continue;
            bool truncated = false;
            const auto candidates = enumerate_simple_paths(graph, root, dim, config.max_hops, discarded, &truncated);
            if (truncated) {
                plan.warnings.push_back("path enumeration from " + root + " to " + dim + " truncated at " +
                                        std::to_string(config.max_hops) + " hops");
            }
            if (candidates.empty()) continue;
            const std::vector<size_t>* best = &candidates.front();
            double best_score = path_product(graph, *best);
            for (const auto& c : candidates) {
                const double s = path_product(graph, c);
                if (s > best_score) {
                    best = &c;
                    best_score = s;
                }
            }

            JoinPath path{root, dim, {}, best_score, {root}};
            for (size_t e : *best) {
                const auto& edge = graph.edges[e];
                path.hops.push_back({edge.from, edge.to, edge.ind_id, edge.score, edge.synthetic});
                path.topo_order.push_back(edge.to);
                parent.try_emplace(edge.to, e);
            }
            tree.paths.push_back(std::move(path));

            for (size_t i = 0; i < graph.edges.size(); ++i) {
                auto it = parent.find(graph.edges[i].to);
                if (it != parent.end() && it->second != i) discarded.insert(i);
            }
        }
        plan.trees.push_back(std::move(tree));
    }

    std::set<std::string> touched;
    for (const auto& e : graph.edges) {
        touched.insert(e.from);
        touched.insert(e.to);
    }
    for (const auto& node : graph.nodes) {
        if (touched.count(node) == 0) plan.trees.push_back({node, {}});
    }
    plan.graph = std::move(graph);
    return plan;
}

JoinPlan generate_join_paths(std::span<const std::string> tables, std::span<const InclusionDependency> inds,
                             const JoinTreeConfig& config) {
    return generate_join_paths(build_join_graph(tables, inds), config);
}

}  // namespace joininfer
