#include "rnacomb/structures.hpp"

#include <algorithm>
#include <sstream>
#include <stack>
#include <stdexcept>

#include "json.hpp"

namespace rnacomb {

void check_params(const ModelParams& params) {
    if (params.theta < 0) throw std::invalid_argument("theta must be nonnegative");
    if (params.tau < 0) throw std::invalid_argument("tau must be nonnegative");
    if (params.p <= 0) throw std::invalid_argument("p must be positive");
    if (params.q < 0) throw std::invalid_argument("q must be nonnegative");
}

SecondaryStructure parse_dot_bracket(const std::string& text) {
    SecondaryStructure s;
    s.n = static_cast<int>(text.size());
    std::stack<int> open;
    for (int i = 1; i <= s.n; ++i) {
        char c = text[i - 1];
        if (c == '.') continue;
        if (c == '(') {
            open.push(i);
        } else if (c == ')') {
            if (open.empty()) throw std::invalid_argument("unbalanced ')' at position " +
                                                          std::to_string(i));
            s.pairs.emplace_back(open.top(), i);
            open.pop();
        } else {
            throw std::invalid_argument(std::string("illegal character '") + c + "'");
        }
    }
    if (!open.empty()) throw std::invalid_argument("unbalanced '(' at position " +
                                                   std::to_string(open.top()));
    std::sort(s.pairs.begin(), s.pairs.end());
    return s;
}

std::string to_dot_bracket(const SecondaryStructure& s) {
    std::string text(static_cast<size_t>(s.n), '.');
    for (const auto& [i, j] : s.pairs) {
        text[i - 1] = '(';
        text[j - 1] = ')';
    }
    return text;
}

namespace {

// partner[i] = j for (i,j) or (j,i) in S, else 0. Index 0 unused.
std::vector<int> partner_array(const SecondaryStructure& s) {
    std::vector<int> partner(static_cast<size_t>(s.n) + 2, 0);
    for (const auto& [i, j] : s.pairs) {
        if (i < 1 || j > s.n || i >= j) throw std::invalid_argument("pair out of range");
        if (partner[i] != 0 || partner[j] != 0)
            throw std::invalid_argument("base occurs in two pairs");
        partner[i] = j;
        partner[j] = i;
    }
    return partner;
}

}  // namespace

int pair_partner(const SecondaryStructure& s, int i) {
    for (const auto& [a, b] : s.pairs) {
        if (a == i) return b;
        if (b == i) return a;
    }
    return 0;
}

bool validate(const SecondaryStructure& s, const ModelParams& params) {
    check_params(params);
    if (s.n < 0) return false;
    std::vector<int> partner(static_cast<size_t>(s.n) + 2, 0);
    for (const auto& [i, j] : s.pairs) {
        if (i < 1 || j > s.n || i >= j) return false;
        if (partner[i] != 0 || partner[j] != 0) return false;  // base triple
        partner[i] = j;
        partner[j] = i;
        if (j - i <= params.theta) return false;  // hairpin threshold
    }
    for (size_t a = 0; a < s.pairs.size(); ++a)
        for (size_t b = a + 1; b < s.pairs.size(); ++b) {
            auto [i, j] = s.pairs[a];
            auto [k, l] = s.pairs[b];
            if (i < k && k < j && j < l) return false;  // pseudoknot
        }
    if (params.tau > 0)
        for (const auto& stem : stems_of(s))
            if (static_cast<int>(stem.size()) - 1 < params.tau) return false;
    return true;
}

std::vector<std::vector<std::pair<int, int>>> stems_of(const SecondaryStructure& s) {
    std::vector<int> partner = partner_array(s);
    std::vector<std::vector<std::pair<int, int>>> stems;
    for (const auto& [i, j] : s.pairs) {
        bool has_outer = i > 1 && j < s.n && partner[i - 1] == j + 1;
        if (has_outer) continue;  // not the outermost pair of its stem
        std::vector<std::pair<int, int>> stem;
        int a = i, b = j;
        for (;;) {
            stem.emplace_back(a, b);
            if (a + 1 < b - 1 && partner[a + 1] == b - 1) {
                ++a;
                --b;
            } else {
                break;
            }
        }
        stems.push_back(std::move(stem));
    }
    return stems;
}

namespace {

void build_tree_node(PlaneTreeNode& node, int lo, int hi, const std::vector<int>& partner) {
    // lo..hi is the open run of positions inside the current region.
    node.corner_weights.clear();
    node.children.clear();
    int free_run = 0;
    for (int pos = lo; pos <= hi;) {
        if (partner[pos] == 0) {
            ++free_run;
            ++pos;
            continue;
        }
        node.corner_weights.push_back(free_run);
        free_run = 0;
        // A stem starts here; follow the stacked chain inward.
        int a = pos, b = partner[pos];
        int weight = 0;
        while (a + 1 < b - 1 && partner[a + 1] == b - 1) {
            ++a;
            --b;
            ++weight;
        }
        PlaneTreeNode child;
        child.edge_weight = weight;
        build_tree_node(child, a + 1, b - 1, partner);
        node.children.push_back(std::move(child));
        pos = partner[pos] + 1;
    }
    node.corner_weights.push_back(free_run);
}

}  // namespace

WeightedPlaneTree to_tree(const SecondaryStructure& s) {
    if (s.pairs.empty())
        throw std::invalid_argument("to_tree: the dual tree needs at least one link");
    std::vector<int> partner = partner_array(s);
    WeightedPlaneTree t;
    build_tree_node(t.root, 1, s.n, partner);
    return t;
}

namespace {

void emit_node(const PlaneTreeNode& node, std::string& out, bool is_root) {
    if (node.corner_weights.size() != node.children.size() + 1)
        throw std::invalid_argument("from_tree: node needs arity+1 corner weights");
    if (!is_root && node.children.size() == 1 && node.corner_weights[0] == 0 &&
        node.corner_weights[1] == 0)
        throw std::invalid_argument("from_tree: inadmissible tree (unreduced stem)");
    for (size_t i = 0; i < node.children.size(); ++i) {
        out.append(static_cast<size_t>(node.corner_weights[i]), '.');
        const PlaneTreeNode& child = node.children[i];
        if (child.edge_weight < 0) throw std::invalid_argument("from_tree: negative edge weight");
        out.append(static_cast<size_t>(child.edge_weight) + 1, '(');
        emit_node(child, out, false);
        out.append(static_cast<size_t>(child.edge_weight) + 1, ')');
    }
    out.append(static_cast<size_t>(node.corner_weights.back()), '.');
}

}  // namespace

SecondaryStructure from_tree(const WeightedPlaneTree& t) {
    if (t.root.children.empty())
        throw std::invalid_argument("from_tree: tree needs at least one edge");
    for (int w : t.root.corner_weights)
        if (w < 0) throw std::invalid_argument("from_tree: negative corner weight");
    std::string text;
    emit_node(t.root, text, true);
    return parse_dot_bracket(text);
}

namespace {

template <typename Fn>
void walk(const PlaneTreeNode& node, bool is_root, Fn&& fn) {
    fn(node, is_root);
    for (const auto& child : node.children) walk(child, false, fn);
}

}  // namespace

int tree_edge_count(const WeightedPlaneTree& t) {
    int edges = 0;
    walk(t.root, true, [&](const PlaneTreeNode& n, bool) {
        edges += static_cast<int>(n.children.size());
    });
    return edges;
}

int tree_edge_weight_total(const WeightedPlaneTree& t) {
    int total = 0;
    walk(t.root, true, [&](const PlaneTreeNode& n, bool is_root) {
        if (!is_root) total += n.edge_weight;
    });
    return total;
}

int tree_corner_weight_total(const WeightedPlaneTree& t) {
    int total = 0;
    walk(t.root, true, [&](const PlaneTreeNode& n, bool) {
        for (int w : n.corner_weights) total += w;
    });
    return total;
}

int tree_leaf_count(const WeightedPlaneTree& t) {
    int leaves = 0;
    walk(t.root, true, [&](const PlaneTreeNode& n, bool is_root) {
        if (!is_root && n.children.empty()) ++leaves;
    });
    return leaves;
}

bool tree_admissible(const WeightedPlaneTree& t, const ModelParams& params) {
    bool ok = true;
    walk(t.root, true, [&](const PlaneTreeNode& n, bool is_root) {
        if (n.corner_weights.size() != n.children.size() + 1) ok = false;
        for (int w : n.corner_weights)
            if (w < 0) ok = false;
        if (!is_root) {
            if (n.edge_weight < params.tau) ok = false;
            if (n.children.size() == 1 && n.corner_weights[0] == 0 && n.corner_weights[1] == 0)
                ok = false;
            if (n.children.empty() && n.corner_weights[0] < params.theta) ok = false;
        }
    });
    return ok && !t.root.children.empty();
}

bool tree_saturated(const WeightedPlaneTree& t, int theta) {
    bool ok = true;
    walk(t.root, true, [&](const PlaneTreeNode& n, bool) {
        int positive = 0;
        for (int w : n.corner_weights) {
            if (w > theta + 1) ok = false;
            if (w > 0) ++positive;
        }
        if (positive > 1) ok = false;
    });
    return ok;
}

bool tree_g_saturated(const WeightedPlaneTree& t, int theta) {
    bool ok = true;
    walk(t.root, true, [&](const PlaneTreeNode& n, bool is_root) {
        size_t k = n.children.size();
        if (!is_root && k == 0 && n.corner_weights[0] > theta + 1) ok = false;
        // Corners flanking each child edge.
        for (size_t i = 1; i <= k; ++i)
            if (n.corner_weights[i - 1] > 0 && n.corner_weights[i] > 0) ok = false;
        // The two corners flanking the parent edge; around the root they meet
        // at the marker, which is not an edge, unless the arity is one (then
        // the pair is already covered above).
        if (!is_root && k >= 1)
            if (n.corner_weights[0] > 0 && n.corner_weights[k] > 0) ok = false;
    });
    return ok;
}

namespace {

bool crosses_any(const SecondaryStructure& s, int i, int j) {
    for (const auto& [a, b] : s.pairs)
        if ((a < i && i < b && b < j) || (i < a && a < j && j < b)) return true;
    return false;
}

}  // namespace

bool can_add_link(const SecondaryStructure& s, const ModelParams& params, bool respect_tau) {
    std::vector<int> partner = partner_array(s);
    for (int i = 1; i <= s.n; ++i) {
        if (partner[i] != 0) continue;
        for (int j = i + params.theta + 1; j <= s.n; ++j) {
            if (partner[j] != 0) continue;
            if (crosses_any(s, i, j)) continue;
            if (respect_tau && params.tau > 0) {
                bool extends = (j - i > 2 && partner[i + 1] == j - 1) ||
                               (i > 1 && j < s.n && partner[i - 1] == j + 1);
                if (!extends) continue;  // would create a lone stem shorter than tau
            }
            return true;
        }
    }
    return false;
}

bool can_extend_stem(const SecondaryStructure& s, const ModelParams& params) {
    std::vector<int> partner = partner_array(s);
    for (const auto& [a, b] : s.pairs) {
        if (a > 1 && b < s.n && partner[a - 1] == 0 && partner[b + 1] == 0) return true;
        if (b - a - 2 > params.theta && partner[a + 1] == 0 && partner[b - 1] == 0) return true;
    }
    return false;
}

ClassifyResult classify(const SecondaryStructure& s, const ModelParams& params) {
    if (!validate(s, params)) throw std::invalid_argument("classify: invalid structure");
    std::vector<int> partner = partner_array(s);
    ClassifyResult r;
    r.links = static_cast<int>(s.pairs.size());
    for (const auto& [i, j] : s.pairs)
        if (i + 1 < j - 1 && partner[i + 1] == j - 1) ++r.stacked_pairs;
    r.saturated = !can_add_link(s, params, /*respect_tau=*/false);
    r.g_saturated = !can_extend_stem(s, params);
    return r;
}

namespace {

struct Enumerator {
    int n = 0;
    ModelParams params;
    Family family;
    const std::function<void(const SecondaryStructure&)>* visit = nullptr;
    std::vector<int> open;
    std::vector<std::pair<int, int>> pairs;

    void emit() {
        SecondaryStructure s;
        s.n = n;
        s.pairs = pairs;
        std::sort(s.pairs.begin(), s.pairs.end());
        if (params.tau > 0 && !validate(s, params)) return;
        if (family != Family::General) {
            ClassifyResult c = classify(s, params);
            if (family == Family::Saturated && !c.saturated) return;
            if (family == Family::GSaturated && !c.g_saturated) return;
        }
        (*visit)(s);
    }

    void rec(int i) {
        if (i > n) {
            if (open.empty()) emit();
            return;
        }
        rec(i + 1);  // leave position i free
        // Open a pair when it can still be closed with theta clearance.
        if (n - i >= static_cast<int>(open.size()) + params.theta + 1) {
            open.push_back(i);
            rec(i + 1);
            open.pop_back();
        }
        if (!open.empty() && i - open.back() > params.theta) {
            int j = open.back();
            open.pop_back();
            pairs.emplace_back(j, i);
            rec(i + 1);
            pairs.pop_back();
            open.push_back(j);
        }
    }
};

}  // namespace

void enumerate_structures(int n, const ModelParams& params, Family family,
                          const std::function<void(const SecondaryStructure&)>& visit, int cap) {
    check_params(params);
    if (n < 1) throw std::invalid_argument("enumerate: n must be positive");
    if (n > cap) throw std::invalid_argument("enumerate: n exceeds the cap of " +
                                             std::to_string(cap));
    Enumerator e;
    e.n = n;
    e.params = params;
    e.family = family;
    e.visit = &visit;
    e.rec(1);
}

Int count_structures(int n, const ModelParams& params, Family family, int cap) {
    Int total = 0;
    enumerate_structures(n, params, family, [&](const SecondaryStructure&) { ++total; }, cap);
    return total;
}

bool annotation_valid(const DangleAnnotation& a) {
    std::string text = to_dot_bracket(a.base);
    int n = a.base.n;
    for (int i : a.five_prime) {
        if (i < 1 || i >= n) return false;
        if (text[i - 1] != '.' || text[i] != '(') return false;
        if (a.three_prime.count(i)) return false;
    }
    for (int i : a.three_prime) {
        if (i <= 1 || i > n) return false;
        if (text[i - 1] != '.' || text[i - 2] != ')') return false;
    }
    return true;
}

std::vector<Int> count_dangle_annotations(const SecondaryStructure& s) {
    std::string text = to_dot_bracket(s);
    // Product over free bases of 1, (1+q), or (1+2q).
    std::vector<Int> poly{Int(1)};
    for (int i = 1; i <= s.n; ++i) {
        if (text[i - 1] != '.') continue;
        bool five = i < s.n && text[i] == '(';
        bool three = i > 1 && text[i - 2] == ')';
        int ways = (five ? 1 : 0) + (three ? 1 : 0);
        if (ways == 0) continue;
        std::vector<Int> next(poly.size() + 1, Int(0));
        for (size_t d = 0; d < poly.size(); ++d) {
            next[d] += poly[d];
            next[d + 1] += ways * poly[d];
        }
        poly = std::move(next);
    }
    return poly;
}

Rat dangle_weight(const SecondaryStructure& s, const Rat& q) {
    std::vector<Int> poly = count_dangle_annotations(s);
    Rat total(0);
    Rat qk(1);
    for (const Int& c : poly) {
        total += Rat(c) * qk;
        qk *= q;
    }
    return total;
}

std::string structure_to_json(const SecondaryStructure& s) {
    nlohmann::ordered_json j;
    j["n"] = s.n;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [a, b] : s.pairs) arr.push_back({a, b});
    j["pairs"] = arr;
    return j.dump();
}

SecondaryStructure structure_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    SecondaryStructure s;
    s.n = j.at("n").get<int>();
    for (const auto& pair : j.at("pairs")) {
        if (!pair.is_array() || pair.size() != 2)
            throw std::invalid_argument("structure json: pairs must be [i,j] arrays");
        s.pairs.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
    std::sort(s.pairs.begin(), s.pairs.end());
    partner_array(s);  // range and triple checks
    return s;
}

}  // namespace rnacomb
