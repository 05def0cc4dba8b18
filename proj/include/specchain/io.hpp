#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "specchain/errors.hpp"
#include "specchain/graph.hpp"

namespace specchain {

// Graph document:
//   {"vertices":[{"id":"a","weight":1.0},...],
//    "edges":[{"u":"a","v":"b","weight":1.0},...]}
// Missing weights default to 1.0.
//
// Assignment document: {"<vertex id>":"<part label>", ...}

namespace detail {

inline std::string json_id(const nlohmann::ordered_json& j, const std::string& where) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return j.dump();
    throw ParseError(where + ": id must be a string");
}

inline double json_weight(const nlohmann::ordered_json& rec, const std::string& where) {
    if (!rec.contains("weight") || rec["weight"].is_null()) return 1.0;
    if (!rec["weight"].is_number()) throw ParseError(where + ": weight must be a number");
    return rec["weight"].get<double>();
}

}  // namespace detail

inline Graph load_graph(const std::string& document) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("graph document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("vertices") || !doc["vertices"].is_array())
        throw ParseError("graph document needs a \"vertices\" array");
    if (doc.contains("edges") && !doc["edges"].is_array())
        throw ParseError("graph document \"edges\" must be an array");

    std::vector<Vertex> vertices;
    std::unordered_map<std::string, std::size_t> index;
    const auto& vs = doc["vertices"];
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const std::string where = "vertex record " + std::to_string(i);
        if (!vs[i].is_object() || !vs[i].contains("id")) throw ParseError(where + ": missing \"id\"");
        Vertex vx{detail::json_id(vs[i]["id"], where), detail::json_weight(vs[i], where)};
        if (!(vx.weight >= 0.0)) throw ParseError(where + " (\"" + vx.id + "\"): negative weight");
        if (!index.emplace(vx.id, i).second)
            throw ParseError(where + ": duplicate vertex id \"" + vx.id + "\"");
        vertices.push_back(std::move(vx));
    }

    std::vector<Edge> edges;
    std::unordered_map<std::size_t, std::size_t> seen;
    const std::size_t n = vertices.size();
    if (doc.contains("edges")) {
        const auto& es = doc["edges"];
        for (std::size_t i = 0; i < es.size(); ++i) {
            std::string where = "edge record " + std::to_string(i);
            if (!es[i].is_object() || !es[i].contains("u") || !es[i].contains("v"))
                throw ParseError(where + ": needs \"u\" and \"v\"");
            const std::string u = detail::json_id(es[i]["u"], where);
            const std::string v = detail::json_id(es[i]["v"], where);
            where += " (\"" + u + "\"-\"" + v + "\")";
            auto iu = index.find(u), iv = index.find(v);
            if (iu == index.end()) throw ParseError(where + ": unknown vertex id \"" + u + "\"");
            if (iv == index.end()) throw ParseError(where + ": unknown vertex id \"" + v + "\"");
            if (iu->second == iv->second) throw ParseError(where + ": self-loop");
            const double w = detail::json_weight(es[i], where);
            if (!(w > 0.0)) throw ParseError(where + ": edge weight must be positive");
            const std::size_t a = std::min(iu->second, iv->second);
            const std::size_t b = std::max(iu->second, iv->second);
            auto [it, fresh] = seen.emplace(a * n + b, i);
            if (!fresh)
                throw ParseError(where + ": duplicate of edge record " + std::to_string(it->second));
            edges.push_back({a, b, w});
        }
    }
    return Graph(std::move(vertices), std::move(edges));
}

/// Part labels are compacted to 0..k-1 in order of first appearance in the
/// document.
inline Partition load_partition(const std::string& document, const Graph& g) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("assignment document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("assignment document must be a JSON object");

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) index.emplace(g.vertex(v).id, v);

    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> assignment(g.vertex_count(), unset);
    std::unordered_map<std::string, std::size_t> labels;
    for (const auto& [id, label_json] : doc.items()) {
        auto it = index.find(id);
        if (it == index.end()) throw ValidationError("assignment names unknown vertex id \"" + id + "\"");
        std::string label;
        if (label_json.is_string())
            label = label_json.get<std::string>();
        else if (label_json.is_number_integer())
            label = label_json.dump();
        else
            throw ValidationError("label of vertex \"" + id + "\" must be a string");
        auto [lit, fresh] = labels.emplace(label, labels.size());
        assignment[it->second] = lit->second;
    }
    for (std::size_t v = 0; v < g.vertex_count(); ++v)
        if (assignment[v] == unset)
            throw ValidationError("assignment omits vertex id \"" + g.vertex(v).id + "\"");
    if (labels.empty()) throw ValidationError("assignment is empty");
    return Partition(g, std::move(assignment), labels.size());
}

inline std::string save_graph(const Graph& g) {
    nlohmann::ordered_json doc;
    auto& vs = doc["vertices"] = nlohmann::ordered_json::array();
    for (const auto& vx : g.vertices()) vs.push_back({{"id", vx.id}, {"weight", vx.weight}});
    auto& es = doc["edges"] = nlohmann::ordered_json::array();
    for (const auto& ed : g.edges())
        es.push_back({{"u", g.vertex(ed.u).id}, {"v", g.vertex(ed.v).id}, {"weight", ed.weight}});
    return doc.dump() + "\n";
}

/// Labels are written as the decimal part index, in vertex order.
inline std::string save_partition(const Graph& g, const Partition& p) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (std::size_t v = 0; v < g.vertex_count(); ++v)
        doc[g.vertex(v).id] = std::to_string(p.part_of(v));
    return doc.dump() + "\n";
}

}  // namespace specchain
