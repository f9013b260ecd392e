#include <algorithm>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

using vertex_id_t = int;

struct Graph {
    std::unordered_map<vertex_id_t, std::unordered_set<vertex_id_t>> adjacency;

    void add_vertex(vertex_id_t v) { adjacency.emplace(v, std::unordered_set<vertex_id_t>{}); }
    void add_edge(vertex_id_t a, vertex_id_t b) {
        adjacency[a].insert(b);
        adjacency[b].insert(a);
    }
    const std::unordered_set<vertex_id_t>& get_neighbors(vertex_id_t v) const {
        return adjacency.at(v);
    }
};

std::unordered_map<vertex_id_t, int> welsh_powell_coloring(const Graph& graph) {
    using degree_vertex_pair = std::pair<int, vertex_id_t>;
    // Step 1: sort vertices by degree in descending order
    std::vector<degree_vertex_pair> degree_vertex_pairs;
    for (const auto& [vertex_id, neighbors] : graph.adjacency) {
        degree_vertex_pairs.emplace_back((int)neighbors.size(), vertex_id);
    }
    std::sort(degree_vertex_pairs.rbegin(), degree_vertex_pairs.rend());
    // Step 2: assign colors; the neighbor visit order decides the result
    std::unordered_map<vertex_id_t, int> color_map;
    for (const auto [_, curr_vertex] : degree_vertex_pairs) {
        int color = 0;
        for (const auto& neighbor : graph.get_neighbors(curr_vertex)) {
            std::printf("probe vertex %d neighbor %d\n", curr_vertex, neighbor);
            if (color_map.count(neighbor) && color_map[neighbor] == color) {
                color = color + 1;
            }
        }
        color_map[curr_vertex] = color;
    }
    return color_map;
}

int main() {
    Graph graph;
    std::vector<vertex_id_t> vertices;
    for (int i = 0; i < 4; ++i) {
        graph.add_vertex(i);
        vertices.push_back(i);
    }
    for (size_t i = 0; i < vertices.size(); i++) {
        for (size_t j = i + 1; j < vertices.size(); j++) {
            graph.add_edge(vertices[i], vertices[j]);
        }
    }
    auto coloring = welsh_powell_coloring(graph);
    std::unordered_map<vertex_id_t, int> expected = {{3, 0}, {2, 1}, {1, 2}, {0, 3}};
    if (coloring != expected) {
        for (int v = 0; v < 4; ++v) {
            std::fprintf(stderr, "coloring mismatch: vertex %d got color %d\n", v, coloring[v]);
        }
        return 1;
    }
    return 0;
}
