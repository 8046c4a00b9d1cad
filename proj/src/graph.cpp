#include "sg/graph.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <sstream>

namespace sg {

bool Mec::contains(StateId s) const {
    return std::binary_search(states.begin(), states.end(), s);
}

int Mec::index_of(StateId s) const {
    auto it = std::lower_bound(states.begin(), states.end(), s);
    if (it == states.end() || *it != s) return -1;
    return static_cast<int>(it - states.begin());
}

namespace {

/// Iterative Tarjan. Returns one component id per node; nodes with id -1 do
/// not occur (every node lands in a component, possibly a singleton).
std::vector<int> strongly_connected_components(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> index(n, -1), lowlink(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    int next_index = 0, next_comp = 0;

    struct Frame {
        int node;
        size_t edge;
    };
    std::vector<Frame> call;

    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            auto& [v, ei] = call.back();
            if (ei == 0) {
                index[v] = lowlink[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            bool descended = false;
            while (ei < adj[v].size()) {
                int w = adj[v][ei++];
                if (index[w] == -1) {
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
            }
            if (descended) continue;
            if (lowlink[v] == index[v]) {
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = next_comp;
                } while (w != v);
                ++next_comp;
            }
            int finished = v;
            call.pop_back();
            if (!call.empty())
                lowlink[call.back().node] =
                    std::min(lowlink[call.back().node], lowlink[finished]);
        }
    }
    return comp;
}

}  // namespace

std::vector<Mec> mec_decomposition(const Game& game) {
    const int n = game.num_states();
    std::vector<bool> alive(n, true);
    std::vector<std::vector<int>> avail(n);
    for (StateId s = 0; s < n; ++s) {
        avail[s].resize(game.num_actions(s));
        for (int a = 0; a < game.num_actions(s); ++a) avail[s][a] = a;
    }

    std::vector<int> comp(n, -1);
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<std::vector<int>> adj(n);
        for (StateId s = 0; s < n; ++s) {
            if (!alive[s]) continue;
            for (int a : avail[s])
                for (const auto& entry : game.action(s, a).dist)
                    if (alive[entry.succ] && entry.succ != s) adj[s].push_back(entry.succ);
        }
        comp = strongly_connected_components(adj);

        for (StateId s = 0; s < n; ++s) {
            if (!alive[s]) continue;
            auto leaves = [&](int a) {
                for (const auto& entry : game.action(s, a).dist)
                    if (!alive[entry.succ] || comp[entry.succ] != comp[s]) return true;
                return false;
            };
            auto& acts = avail[s];
            size_t before = acts.size();
            acts.erase(std::remove_if(acts.begin(), acts.end(), leaves), acts.end());
            if (acts.size() != before) changed = true;
            if (acts.empty()) {
                alive[s] = false;
                changed = true;
            }
        }
    }

    // Group surviving states by component, ordered by smallest member.
    std::vector<std::vector<StateId>> groups;
    std::vector<int> group_of_comp;
    for (StateId s = 0; s < n; ++s) {
        if (!alive[s]) continue;
        int c = comp[s];
        int g = -1;
        for (size_t i = 0; i < groups.size(); ++i)
            if (group_of_comp[i] == c) g = static_cast<int>(i);
        if (g == -1) {
            g = static_cast<int>(groups.size());
            groups.emplace_back();
            group_of_comp.push_back(c);
        }
        groups[g].push_back(s);
    }

    std::vector<Mec> mecs;
    for (auto& members : groups) {
        Mec mec;
        mec.states = members;  // ascending by construction
        mec.staying_actions.resize(members.size());
        for (size_t i = 0; i < members.size(); ++i) {
            const StateId s = members[i];
            mec.staying_actions[i] = avail[s];
            for (int a = 0; a < game.num_actions(s); ++a) {
                bool exits = false;
                for (const auto& entry : game.action(s, a).dist)
                    if (!mec.contains(entry.succ)) {
                        exits = true;
                        mec.exit_states.push_back(entry.succ);
                    }
                if (exits) mec.exiting_pairs.emplace_back(s, a);
            }
        }
        std::sort(mec.exit_states.begin(), mec.exit_states.end());
        mec.exit_states.erase(std::unique(mec.exit_states.begin(), mec.exit_states.end()),
                              mec.exit_states.end());
        mecs.push_back(std::move(mec));
    }
    std::sort(mecs.begin(), mecs.end(),
              [](const Mec& a, const Mec& b) { return a.states.front() < b.states.front(); });
    return mecs;
}

Strategy attractor_strategy(const Game& game) {
    const int n = game.num_states();
    std::vector<bool> discovered(n, false);
    Strategy sigma{Owner::maximizer, std::vector<int>(n, -1)};

    std::vector<StateId> undecided;
    for (StateId s = 0; s < n; ++s) {
        if (game.is_absorbing(s)) {
            discovered[s] = true;
            if (game.state(s).owner == Owner::maximizer) sigma.choice[s] = 0;
        } else {
            undecided.push_back(s);
        }
    }

    bool progress = true;
    while (progress) {
        progress = false;
        std::vector<StateId> wave;
        for (StateId s : undecided) {
            if (discovered[s]) continue;
            for (int a = 0; a < game.num_actions(s) && sigma.choice[s] == -1; ++a)
                for (const auto& entry : game.action(s, a).dist)
                    if (discovered[entry.succ]) {
                        if (game.state(s).owner == Owner::maximizer)
                            sigma.choice[s] = a;
                        else
                            sigma.choice[s] = -2;  // mark Minimizer states discovered
                        wave.push_back(s);
                        break;
                    }
        }
        for (StateId s : wave) {
            discovered[s] = true;
            progress = true;
        }
    }

    std::vector<StateId> stuck;
    for (StateId s = 0; s < n; ++s)
        if (!discovered[s]) stuck.push_back(s);
    if (!stuck.empty()) {
        std::ostringstream msg;
        msg << "states cannot reach a target or sink:";
        for (StateId s : stuck) msg << " " << s;
        throw ValidationError(msg.str());
    }
    for (StateId s = 0; s < n; ++s)
        if (sigma.choice[s] == -2) sigma.choice[s] = -1;
    return sigma;
}

bool is_proper(const Game& game, const Strategy& sigma) {
    const Game mdp = induce_mdp(game, sigma);
    for (const Mec& mec : mec_decomposition(mdp)) {
        bool touches_absorbing = false;
        for (StateId s : mec.states)
            if (mdp.is_absorbing(s)) touches_absorbing = true;
        if (!touches_absorbing && mec.exiting_pairs.empty()) return false;
    }
    return true;
}

bool is_stopping(const Game& game) {
    for (const Mec& mec : mec_decomposition(game))
        if (mec.states.size() != 1 || !game.is_absorbing(mec.states.front())) return false;
    return true;
}

std::vector<int> mec_postorder(const Game& game, const std::vector<Mec>& mecs) {
    const int n = game.num_states();
    const int m = static_cast<int>(mecs.size());

    // Quotient nodes: one per MEC, one per state outside every MEC.
    std::vector<int> node_of_state(n, -1);
    for (int i = 0; i < m; ++i)
        for (StateId s : mecs[i].states) node_of_state[s] = i;
    int next_node = m;
    for (StateId s = 0; s < n; ++s)
        if (node_of_state[s] == -1) node_of_state[s] = next_node++;

    std::vector<std::vector<int>> adj(next_node);
    for (StateId s = 0; s < n; ++s)
        for (int a = 0; a < game.num_actions(s); ++a)
            for (const auto& entry : game.action(s, a).dist) {
                int from = node_of_state[s], to = node_of_state[entry.succ];
                if (from != to &&
                    std::find(adj[from].begin(), adj[from].end(), to) == adj[from].end())
                    adj[from].push_back(to);
            }

    std::vector<int> order;
    std::vector<bool> visited(next_node, false);
    struct Frame {
        int node;
        size_t edge;
    };
    std::vector<Frame> stack{{node_of_state[game.initial()], 0}};
    visited[stack.front().node] = true;
    while (!stack.empty()) {
        auto& [v, ei] = stack.back();
        if (ei < adj[v].size()) {
            int w = adj[v][ei++];
            if (!visited[w]) {
                visited[w] = true;
                stack.push_back({w, 0});
            }
        } else {
            if (v < m) order.push_back(v);
            stack.pop_back();
        }
    }
    for (int i = 0; i < m; ++i)
        if (!visited[i]) order.push_back(i);
    return order;
}

std::vector<StateId> accessible_states(const Game& game, std::span<const StateId> from) {
    std::vector<bool> seen(game.num_states(), false);
    std::deque<StateId> queue;
    for (StateId s : from)
        if (!seen[s]) {
            seen[s] = true;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        StateId s = queue.front();
        queue.pop_front();
        for (int a = 0; a < game.num_actions(s); ++a)
            for (const auto& entry : game.action(s, a).dist)
                if (!seen[entry.succ]) {
                    seen[entry.succ] = true;
                    queue.push_back(entry.succ);
                }
    }
    std::vector<StateId> result;
    for (StateId s = 0; s < game.num_states(); ++s)
        if (seen[s]) result.push_back(s);
    return result;
}

std::vector<bool> states_reaching(const Game& game, const std::vector<bool>& goal) {
    const int n = game.num_states();
    std::vector<std::vector<StateId>> preds(n);
    for (StateId s = 0; s < n; ++s)
        for (int a = 0; a < game.num_actions(s); ++a)
            for (const auto& entry : game.action(s, a).dist) preds[entry.succ].push_back(s);
    std::vector<bool> reach(n, false);
    std::vector<StateId> stack;
    for (StateId s = 0; s < n; ++s)
        if (goal[s]) {
            reach[s] = true;
            stack.push_back(s);
        }
    while (!stack.empty()) {
        StateId v = stack.back();
        stack.pop_back();
        for (StateId p : preds[v])
            if (!reach[p]) {
                reach[p] = true;
                stack.push_back(p);
            }
    }
    return reach;
}

Game dead_states_to_sinks(const Game& game, std::vector<StateId>* dead_out) {
    std::vector<bool> goal(game.num_states(), false);
    for (StateId t : game.targets()) goal[t] = true;
    std::vector<bool> reach = states_reaching(game, goal);

    std::vector<GameState> states;
    std::vector<StateId> dead;
    for (StateId s = 0; s < game.num_states(); ++s) {
        GameState st = game.state(s);
        if (!reach[s] && st.kind == Kind::normal) {
            st.kind = Kind::sink;
            st.actions = {Game::absorbing_loop(s)};
            dead.push_back(s);
        }
        states.push_back(std::move(st));
    }
    if (dead_out) *dead_out = dead;
    return Game(std::move(states), game.initial());
}

}  // namespace sg
