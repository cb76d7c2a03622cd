#include "recon/io.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace recon {

std::string format_double(double x, int significant) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant, x);
    return buf;
}

namespace {

template <typename S, typename ParseFn>
BasicTreeSpec<S> parse_tree_impl(std::istream& in, ParseFn&& parse_scalar) {
    BasicTreeSpec<S> tree;
    std::map<std::pair<S, S>, std::int32_t> channel_ids;
    std::map<long long, std::int32_t> vertex_ids;
    S root_theta{}, root_delta{};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        long long id;
        std::string parent_tok, theta_tok, delta_tok;
        if (!(ls >> id)) continue;  // blank line
        if (!(ls >> parent_tok >> theta_tok >> delta_tok))
            throw std::invalid_argument("tree parse: line " + std::to_string(lineno) +
                                        ": expected 'id parent theta delta'");
        if (vertex_ids.count(id))
            throw std::invalid_argument("tree parse: duplicate vertex id " + std::to_string(id));
        std::int32_t parent_idx = -1;
        if (parent_tok != "-") {
            const long long pid = std::stoll(parent_tok);
            const auto it = vertex_ids.find(pid);
            if (it == vertex_ids.end())
                throw std::invalid_argument("tree parse: line " + std::to_string(lineno) +
                                            ": parent must be declared first");
            parent_idx = it->second;
        } else if (!tree.parent.empty()) {
            throw std::invalid_argument("tree parse: multiple roots");
        }
        const S theta = parse_scalar(theta_tok);
        const S delta = parse_scalar(delta_tok);
        std::int32_t channel_idx = -1;
        if (parent_idx < 0) {
            // the root's columns define the stationary context for edgeless trees
            root_theta = theta;
            root_delta = delta;
        }
        if (parent_idx >= 0) {
            const auto key = std::make_pair(theta, delta);
            const auto it = channel_ids.find(key);
            if (it != channel_ids.end()) {
                channel_idx = it->second;
            } else {
                tree.channels.push_back(channel_from_theta_delta(theta, delta));
                channel_idx = static_cast<std::int32_t>(tree.channels.size() - 1);
                channel_ids.emplace(key, channel_idx);
            }
        }
        vertex_ids.emplace(id, static_cast<std::int32_t>(tree.parent.size()));
        tree.parent.push_back(parent_idx);
        tree.edge_channel.push_back(channel_idx);
    }
    if (tree.parent.empty()) throw std::invalid_argument("tree parse: empty input");
    if (tree.channels.empty())  // single-vertex tree: stationary context from the root line
        tree.channels.push_back(channel_from_theta_delta(root_theta, root_delta));
    tree.finalize();
    return tree;
}

}  // namespace

TreeSpec parse_tree(std::istream& in) {
    return parse_tree_impl<double>(in, [](const std::string& tok) { return std::stod(tok); });
}

ExactTreeSpec parse_tree_exact(std::istream& in) {
    return parse_tree_impl<Rational>(in,
                                     [](const std::string& tok) { return rational_from_decimal(tok); });
}

std::string format_tree(const TreeSpec& tree) {
    std::ostringstream out;
    const auto& pi = tree.channels.at(0);
    for (std::int32_t v = 0; v < tree.n_vertices(); ++v) {
        out << v << ' ';
        if (tree.parent[v] < 0)  // theta=0 with delta = pi- - pi+ reproduces the stationary context
            out << "- 0 " << format_double(pi.pi_minus - pi.pi_plus) << '\n';
        else
            out << tree.parent[v] << ' ' << format_double(tree.edge(v).theta) << ' '
                << format_double(tree.edge(v).delta) << '\n';
    }
    return out.str();
}

nlohmann::json channel_json(const Channel& ch) {
    return nlohmann::json{{"theta", ch.theta},       {"delta", ch.delta},
                          {"eps_plus", ch.eps_plus}, {"eps_minus", ch.eps_minus},
                          {"pi_plus", ch.pi_plus},   {"pi_minus", ch.pi_minus},
                          {"swapped", ch.swapped}};
}

namespace {

template <typename S>
nlohmann::json distribution_json_impl(const BasicMagnetization<S>& dist) {
    nlohmann::json atoms = nlohmann::json::array();
    for (std::size_t i = 0; i < dist.size(); ++i) {
        nlohmann::json atom{{"value", to_double(dist.values[i])},
                            {"prob", to_double(dist.probs[i])}};
        if constexpr (!std::is_same_v<S, double>) {
            atom["value_exact"] = dist.values[i].str();
            atom["prob_exact"] = dist.probs[i].str();
        }
        atoms.push_back(std::move(atom));
    }
    const MomentTriple mt = moments(dist);
    return nlohmann::json{
        {"atoms", std::move(atoms)},
        {"pi_plus", to_double(dist.pi_plus)},
        {"pi_minus", to_double(dist.pi_minus)},
        {"moments", {{"m", mt.m}, {"m_plus", mt.m_plus}, {"m_minus", mt.m_minus}}}};
}

}  // namespace

nlohmann::json distribution_json(const MagnetizationDistribution& dist) {
    return distribution_json_impl(dist);
}

nlohmann::json distribution_json(const ExactMagnetization& dist) {
    return distribution_json_impl(dist);
}

nlohmann::json estimate_json(const McEstimate& est) {
    return nlohmann::json{{"quantity", quantity_name(est.quantity)},
                          {"mean", est.mean},
                          {"std_error", est.std_error},
                          {"n_samples", est.n_samples},
                          {"seed", est.seed}};
}

nlohmann::json moments_json(const McMoments& moments) {
    return nlohmann::json{{"m", estimate_json(moments.m)},
                          {"m_plus", estimate_json(moments.m_plus)},
                          {"m_minus", estimate_json(moments.m_minus)},
                          {"m_plus_rn", estimate_json(moments.m_plus_rn)},
                          {"m_minus_rn", estimate_json(moments.m_minus_rn)},
                          {"mixture_residual", moments.mixture_residual}};
}

nlohmann::json identity_report_json(const IdentityReport& report) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& item : report.items)
        items.push_back({{"name", item.name}, {"residual", item.residual}});
    return nlohmann::json{{"items", std::move(items)},
                          {"max_residual", report.max_residual},
                          {"tol", report.tol},
                          {"pass", report.pass},
                          {"mixed_sign_theta", report.mixed_sign_theta}};
}

nlohmann::json bound_report_json(const BoundReport& report) {
    return nlohmann::json{{"theta0", report.theta0},
                          {"beta", report.beta},
                          {"delta_bar", report.delta_bar},
                          {"ks_product", report.ks_product},
                          {"classification", classification_name(report.classification)}};
}

nlohmann::json cutset_json(const CutSet& cut, double weight) {
    return nlohmann::json{
        {"weight", weight}, {"vertices", cut.vertices}, {"antichain", cut.antichain}};
}

namespace {

template <typename S>
void write_distribution_csv_impl(std::ostream& out, const BasicMagnetization<S>& dist) {
    out << "value,prob\n";
    for (std::size_t i = 0; i < dist.size(); ++i)
        out << format_double(to_double(dist.values[i])) << ','
            << format_double(to_double(dist.probs[i])) << '\n';
}

}  // namespace

void write_distribution_csv(std::ostream& out, const MagnetizationDistribution& dist) {
    write_distribution_csv_impl(out, dist);
}

void write_distribution_csv(std::ostream& out, const ExactMagnetization& dist) {
    write_distribution_csv_impl(out, dist);
}

}  // namespace recon
