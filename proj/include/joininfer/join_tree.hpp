#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "joininfer/ind_inference.hpp"

namespace joininfer {

struct JoinEdge {
    std::string from;  ///< FK side table
    std::string to;    ///< PK side table
    double score = 0.0;
    bool synthetic = false;  ///< reverse edge added for a blackhole table
    std::string ind_id;      ///< id of the IND this edge carries (or mirrors)

    auto operator<=>(const JoinEdge&) const = default;
};

struct JoinGraph {
    std::vector<std::string> nodes;  ///< sorted
    std::vector<JoinEdge> edges;     ///< sorted by (from, to, ind_id)
    std::vector<std::string> warnings;

    bool has_node(std::string_view name) const;
};

/// Builds the graph from active default edges. Every table in `tables` is a
/// node, whether or not an edge touches it.
JoinGraph build_join_graph(std::span<const std::string> tables, std::span<const InclusionDependency> inds);

/// Drops the lowest-score real edge of each directed cycle until none
/// remain. Returns the number of dropped edges; each drop adds a warning.
size_t break_cycles(JoinGraph& graph);

/// Adds a synthetic reverse edge from every blackhole table (in-degree >=
/// min_in_degree, out-degree 0) to each table referencing it. Returns the
/// number of edges added.
size_t detect_blackholes(JoinGraph& graph, size_t min_in_degree = 2);

struct JoinHop {
    std::string from;
    std::string to;
    std::string ind_id;
    double score = 0.0;
    bool synthetic = false;
};

struct JoinPath {
    std::string root;
    std::string dimension;
    std::vector<JoinHop> hops;
    double combined_score = 1.0;
    std::vector<std::string> topo_order;
};

struct JoinTree {
    std::string root;
    std::vector<JoinPath> paths;  ///< selection order; empty for a singleton table
};

struct JoinTreeConfig {
    size_t max_hops = 8;
    size_t blackhole_min_in_degree = 2;
};

struct JoinPlan {
    JoinGraph graph;  ///< after cycle breaking and blackhole augmentation
    std::vector<JoinTree> trees;
    std::vector<std::string> warnings;
};

/// Enumerates simple paths from `from` to `to` of at most max_hops hops,
/// skipping edges listed in `discarded` (indexes into graph.edges). Paths are
/// returned as edge-index sequences in lexicographic order of their table
/// sequence. Sets *truncated when the hop bound cut off a longer path.
std::vector<std::vector<size_t>> enumerate_simple_paths(const JoinGraph& graph, const std::string& from,
                                                        const std::string& to, size_t max_hops,
                                                        const std::set<size_t>& discarded = {},
                                                        bool* truncated = nullptr);

/// Longest simple path length in hops; nullopt when `to` is unreachable.
std::optional<size_t> longest_path_length(const JoinGraph& graph, const std::string& from, const std::string& to,
                                          size_t max_hops = 8);

/// Roots are tables with at least one outgoing edge, ranked by the number of
/// real outgoing edges, then by name. Tables without any edge become
/// singleton trees.
std::vector<std::string> rank_roots(const JoinGraph& graph);

/// Cycle breaking, blackhole augmentation, then per-root path selection.
JoinPlan generate_join_paths(JoinGraph graph, const JoinTreeConfig& config = {});

/// Convenience overload over an IND set.
JoinPlan generate_join_paths(std::span<const std::string> tables, std::span<const InclusionDependency> inds,
                             const JoinTreeConfig& config = {});

}  // namespace joininfer
