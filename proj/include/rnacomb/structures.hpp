#pragma once

#include "rnacomb/rational.hpp"

#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rnacomb {

// theta: minimum unpaired bases enclosed by a hairpin pair (j - i > theta).
// tau: minimum stem length, where the length of a stem is its number of
// stacking adjacencies (a lone pair is a stem of length 0).
// p: stickiness weight per link, q: weight per dangle.
struct ModelParams {
    int theta = 1;
    int tau = 0;
    Rat p = Rat(1);
    Rat q = Rat(0);
};

void check_params(const ModelParams& params);

// Pairs are 1-based and kept sorted by opening position.
struct SecondaryStructure {
    int n = 0;
    std::vector<std::pair<int, int>> pairs;
};

SecondaryStructure parse_dot_bracket(const std::string& text);
std::string to_dot_bracket(const SecondaryStructure& s);

// Conditions: no base triples, no pseudoknots, hairpin threshold theta,
// stem threshold tau. The homopolymer model carries no sequence condition.
bool validate(const SecondaryStructure& s, const ModelParams& params);

// Maximal runs of stacked pairs, outermost pair first.
std::vector<std::vector<std::pair<int, int>>> stems_of(const SecondaryStructure& s);

int pair_partner(const SecondaryStructure& s, int i);  // 0 when free

// Rooted plane tree dual to a structure with at least one link. Edges carry
// stem lengths, corners carry free-element counts of segments. Corners of a
// node of arity k are indexed 0..k counterclockwise from the parent edge
// (root marker for the root): corner 0 precedes the first child, corner k
// follows the last child.
struct PlaneTreeNode {
    int edge_weight = 0;  // weight of the edge to the parent; unused at root
    std::vector<int> corner_weights;
    std::vector<PlaneTreeNode> children;
};

struct WeightedPlaneTree {
    PlaneTreeNode root;
};

WeightedPlaneTree to_tree(const SecondaryStructure& s);
SecondaryStructure from_tree(const WeightedPlaneTree& t);

int tree_edge_count(const WeightedPlaneTree& t);
int tree_edge_weight_total(const WeightedPlaneTree& t);
int tree_corner_weight_total(const WeightedPlaneTree& t);
int tree_leaf_count(const WeightedPlaneTree& t);

// Admissibility: every non-root node of arity one has a positive incident
// corner, leaf corners are >= theta, edge weights are >= tau.
bool tree_admissible(const WeightedPlaneTree& t, const ModelParams& params);

// Dual characterizations of the two local-optimality notions, valid for
// structures with at least one link (tau = 0 for the saturated test).
bool tree_saturated(const WeightedPlaneTree& t, int theta);
bool tree_g_saturated(const WeightedPlaneTree& t, int theta);

struct ClassifyResult {
    int links = 0;
    int stacked_pairs = 0;
    bool saturated = false;
    bool g_saturated = false;
};

// saturated: no pair can be added keeping conditions 2-4 under theta; new
// lone pairs are legal candidates regardless of tau (Zuker sense).
// g_saturated: no addable pair extends an existing stem.
ClassifyResult classify(const SecondaryStructure& s, const ModelParams& params);

// respect_tau makes a lone-pair addition illegal when tau > 0; with it the
// "no addition possible" notion coincides with g-saturation for tau > 0.
bool can_add_link(const SecondaryStructure& s, const ModelParams& params, bool respect_tau);
bool can_extend_stem(const SecondaryStructure& s, const ModelParams& params);

enum class Family { General, Saturated, GSaturated };

constexpr int kDefaultEnumerationCap = 18;

// Brute-force generation of every valid structure of the class, each exactly
// once. Ground-truth oracle for the counting machinery.
void enumerate_structures(int n, const ModelParams& params, Family family,
                          const std::function<void(const SecondaryStructure&)>& visit,
                          int cap = kDefaultEnumerationCap);

Int count_structures(int n, const ModelParams& params, Family family,
                     int cap = kDefaultEnumerationCap);

// A dangle annotation distinguishes free bases: a 5' dangle sits immediately
// left of an opening parenthesis, a 3' dangle immediately right of a closing
// one. A base eligible both ways carries at most one of the two roles.
struct DangleAnnotation {
    SecondaryStructure base;
    std::set<int> five_prime;
    std::set<int> three_prime;
};

bool annotation_valid(const DangleAnnotation& a);

// Coefficient d of the returned vector counts annotations with d dangles.
std::vector<Int> count_dangle_annotations(const SecondaryStructure& s);

Rat dangle_weight(const SecondaryStructure& s, const Rat& q);

std::string structure_to_json(const SecondaryStructure& s);
SecondaryStructure structure_from_json(const std::string& text);

}  // namespace rnacomb
