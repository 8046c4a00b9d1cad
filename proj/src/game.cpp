#include "sg/game.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace sg {

namespace {

bool valid_name(std::string_view name) {
    if (name.empty()) return false;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '-' || c == '.' || c == '~';
        if (!ok) return false;
    }
    return true;
}

}  // namespace

GameAction Game::absorbing_loop(StateId s) {
    return GameAction{"loop", {TransitionEntry{s, Rat(1)}}};
}

Game::Game(std::vector<GameState> states, StateId initial)
    : states_(std::move(states)), initial_(initial) {
    const int n = num_states();
    if (n == 0) throw ValidationError("game has no states");
    if (initial_ < 0 || initial_ >= n)
        throw ValidationError("initial state " + std::to_string(initial_) + " out of range");

    for (int s = 0; s < n; ++s) {
        GameState& st = states_[s];
        if (st.actions.empty())
            throw ValidationError("state " + std::to_string(s) + " has no actions");
        if (st.kind != Kind::normal) {
            if (st.actions.size() != 1 || st.actions[0].dist.size() != 1 ||
                st.actions[0].dist[0].succ != s || st.actions[0].dist[0].prob != 1)
                throw ValidationError("state " + std::to_string(s) +
                                      " is absorbing but lacks the probability-1 self-loop");
        }
        std::vector<std::string> seen;
        for (auto& act : st.actions) {
            if (!valid_name(act.name))
                throw ValidationError("invalid action name at state " + std::to_string(s));
            if (std::find(seen.begin(), seen.end(), act.name) != seen.end())
                throw ValidationError("duplicate action '" + act.name + "' at state " +
                                      std::to_string(s));
            seen.push_back(act.name);

            std::sort(act.dist.begin(), act.dist.end(),
                      [](const TransitionEntry& x, const TransitionEntry& y) {
                          return x.succ < y.succ;
                      });
            for (auto& entry : act.dist) entry.prob.canonicalize();
            Rat total(0);
            StateId prev = -1;
            for (const auto& [succ, prob] : act.dist) {
                if (succ < 0 || succ >= n)
                    throw ValidationError("transition from state " + std::to_string(s) +
                                          " to unknown state " + std::to_string(succ));
                if (succ == prev)
                    throw ValidationError("duplicate transition (" + std::to_string(s) + "," +
                                          act.name + "," + std::to_string(succ) + ")");
                prev = succ;
                if (prob <= 0 || prob > 1)
                    throw ValidationError("probability out of (0,1] at (" + std::to_string(s) +
                                          "," + act.name + ")");
                total += prob;
            }
            if (total != 1)
                throw ValidationError("distribution at (" + std::to_string(s) + "," + act.name +
                                      ") sums to " + to_fraction_string(total));
        }
        if (st.kind == Kind::target) targets_.push_back(s);
        if (st.kind == Kind::sink) sinks_.push_back(s);
    }
}

int Game::find_action(StateId s, std::string_view name) const {
    const auto& acts = state(s).actions;
    for (size_t i = 0; i < acts.size(); ++i)
        if (acts[i].name == name) return static_cast<int>(i);
    return -1;
}

void Strategy::validate(const Game& game) const {
    if (static_cast<int>(choice.size()) != game.num_states())
        throw ValidationError("strategy domain size mismatch");
    for (StateId s = 0; s < game.num_states(); ++s) {
        if (game.state(s).owner == player) {
            if (choice[s] < 0 || choice[s] >= game.num_actions(s))
                throw ValidationError("strategy picks unavailable action at state " +
                                      std::to_string(s));
        } else if (choice[s] != -1) {
            throw ValidationError("strategy assigns a choice to a state it does not own");
        }
    }
}

Strategy Strategy::first_action(const Game& game, Owner player) {
    Strategy s{player, std::vector<int>(game.num_states(), -1)};
    for (StateId v = 0; v < game.num_states(); ++v)
        if (game.state(v).owner == player) s.choice[v] = 0;
    return s;
}

// ---------------------------------------------------------------------------
// .sg parsing

namespace {

struct Tokenized {
    int line;
    std::vector<std::string> tokens;
};

[[noreturn]] void parse_fail(int line, const std::string& msg) {
    throw ParseError("line " + std::to_string(line) + ": " + msg);
}

}  // namespace

Game parse_game(std::string_view text) {
    std::vector<Tokenized> lines;
    {
        std::string cur;
        int lineno = 1;
        auto flush = [&](int no) {
            std::istringstream iss(cur);
            Tokenized t{no, {}};
            std::string tok;
            while (iss >> tok) {
                if (tok[0] == '#') break;
                t.tokens.push_back(tok);
            }
            if (!t.tokens.empty()) lines.push_back(std::move(t));
            cur.clear();
        };
        for (char c : text) {
            if (c == '\n') {
                flush(lineno);
                ++lineno;
            } else {
                cur += c;
            }
        }
        flush(lineno);
    }

    if (lines.empty() || lines[0].tokens != std::vector<std::string>{"sg"})
        throw ParseError("line 1: expected 'sg' header");

    std::vector<GameState> states;
    // Raw transition rows per (state, action name), in declaration order.
    std::vector<std::vector<std::pair<std::string, std::vector<TransitionEntry>>>> decl;
    StateId initial = -1;
    bool saw_init = false;

    auto parse_id = [](const std::string& tok) -> long {
        try {
            size_t pos = 0;
            long v = std::stol(tok, &pos);
            if (pos != tok.size()) return -1;
            return v;
        } catch (...) {
            return -1;
        }
    };

    for (size_t li = 1; li < lines.size(); ++li) {
        const auto& [line, tok] = lines[li];
        const std::string& kw = tok[0];
        if (kw == "state") {
            if (tok.size() != 3) parse_fail(line, "expected 'state <id> <max|min|target|sink>'");
            long id = parse_id(tok[1]);
            if (id != static_cast<long>(states.size()))
                parse_fail(line, "state ids must be dense and declared in order (expected " +
                                     std::to_string(states.size()) + ")");
            GameState st;
            if (tok[2] == "max")
                st.owner = Owner::maximizer;
            else if (tok[2] == "min")
                st.owner = Owner::minimizer;
            else if (tok[2] == "target")
                st.kind = Kind::target;
            else if (tok[2] == "sink")
                st.kind = Kind::sink;
            else
                parse_fail(line, "unknown state kind '" + tok[2] + "'");
            states.push_back(std::move(st));
            decl.emplace_back();
        } else if (kw == "init") {
            if (tok.size() != 2) parse_fail(line, "expected 'init <id>'");
            long id = parse_id(tok[1]);
            if (id < 0 || id >= static_cast<long>(states.size()))
                parse_fail(line, "init references undeclared state");
            initial = static_cast<StateId>(id);
            saw_init = true;
        } else if (kw == "action") {
            if (tok.size() != 3) parse_fail(line, "expected 'action <state-id> <name>'");
            long id = parse_id(tok[1]);
            if (id < 0 || id >= static_cast<long>(states.size()))
                parse_fail(line, "action references undeclared state");
            if (states[id].kind != Kind::normal)
                parse_fail(line, "target/sink states must not declare actions");
            if (!valid_name(tok[2])) parse_fail(line, "invalid action name '" + tok[2] + "'");
            for (const auto& [name, _] : decl[id])
                if (name == tok[2])
                    parse_fail(line, "duplicate action '" + tok[2] + "' at state " + tok[1]);
            decl[id].emplace_back(tok[2], std::vector<TransitionEntry>{});
        } else if (kw == "trans") {
            if (tok.size() != 5)
                parse_fail(line, "expected 'trans <state-id> <action> <succ-id> <prob>'");
            long id = parse_id(tok[1]);
            if (id < 0 || id >= static_cast<long>(states.size()))
                parse_fail(line, "trans references undeclared state");
            auto it = std::find_if(decl[id].begin(), decl[id].end(),
                                   [&](const auto& p) { return p.first == tok[2]; });
            if (it == decl[id].end())
                parse_fail(line, "trans references undeclared action '" + tok[2] + "'");
            long succ = parse_id(tok[3]);
            if (succ < 0 || succ >= static_cast<long>(states.size()))
                parse_fail(line, "trans references undeclared successor");
            auto prob = parse_rational(tok[4]);
            if (!prob) parse_fail(line, "malformed probability '" + tok[4] + "'");
            it->second.push_back(TransitionEntry{static_cast<StateId>(succ), *prob});
        } else {
            parse_fail(line, "unknown directive '" + kw + "'");
        }
    }

    if (!saw_init) throw ParseError("missing 'init' directive");

    for (size_t s = 0; s < states.size(); ++s) {
        if (states[s].kind != Kind::normal) {
            states[s].actions.push_back(Game::absorbing_loop(static_cast<StateId>(s)));
            continue;
        }
        for (auto& [name, entries] : decl[s])
            states[s].actions.push_back(GameAction{name, std::move(entries)});
    }
    return Game(std::move(states), initial);
}

std::string render_game(const Game& game) {
    std::ostringstream out;
    out << "sg\n";
    for (StateId s = 0; s < game.num_states(); ++s) {
        const auto& st = game.state(s);
        const char* kind = st.kind == Kind::target ? "target"
                           : st.kind == Kind::sink ? "sink"
                           : st.owner == Owner::maximizer ? "max"
                                                          : "min";
        out << "state " << s << " " << kind << "\n";
    }
    out << "init " << game.initial() << "\n";
    for (StateId s = 0; s < game.num_states(); ++s) {
        if (game.is_absorbing(s)) continue;
        for (const auto& act : game.state(s).actions) {
            out << "action " << s << " " << act.name << "\n";
            for (const auto& [succ, prob] : act.dist)
                out << "trans " << s << " " << act.name << " " << succ << " "
                    << to_fraction_string(prob) << "\n";
        }
    }
    return out.str();
}

Rat action_value(const Game& game, std::span<const Rat> values, StateId s, int a) {
    if (a < 0 || a >= game.num_actions(s)) throw ValidationError("unknown action");
    Rat acc(0);
    for (const auto& [succ, prob] : game.action(s, a).dist) acc += prob * values[succ];
    return acc;
}

double action_value(const Game& game, std::span<const double> values, StateId s, int a) {
    if (a < 0 || a >= game.num_actions(s)) throw ValidationError("unknown action");
    double acc = 0.0;
    for (const auto& [succ, prob] : game.action(s, a).dist)
        acc += to_double(prob) * values[succ];
    return acc;
}

namespace {

Game restrict_choices(const Game& game, const Strategy* sigma, const Strategy* tau) {
    std::vector<GameState> states;
    states.reserve(game.num_states());
    for (StateId s = 0; s < game.num_states(); ++s) {
        GameState st = game.state(s);
        if (st.kind == Kind::normal) {
            const Strategy* pick = st.owner == Owner::maximizer ? sigma : tau;
            if (pick) st.actions = {game.action(s, (*pick)[s])};
        }
        states.push_back(std::move(st));
    }
    return Game(std::move(states), game.initial());
}

}  // namespace

Game induce_mc(const Game& game, const Strategy& sigma, const Strategy& tau) {
    if (sigma.player != Owner::maximizer || tau.player != Owner::minimizer)
        throw ValidationError("induce_mc expects a (Maximizer, Minimizer) strategy pair");
    sigma.validate(game);
    tau.validate(game);
    return restrict_choices(game, &sigma, &tau);
}

Game induce_mdp(const Game& game, const Strategy& sigma) {
    if (sigma.player != Owner::maximizer)
        throw ValidationError("induce_mdp expects a Maximizer strategy");
    sigma.validate(game);
    return restrict_choices(game, &sigma, nullptr);
}

std::pair<Strategy, Strategy> greedy_strategies(const Game& game,
                                                std::span<const double> values) {
    Strategy sigma{Owner::maximizer, std::vector<int>(game.num_states(), -1)};
    Strategy tau{Owner::minimizer, std::vector<int>(game.num_states(), -1)};
    for (StateId s = 0; s < game.num_states(); ++s) {
        const bool maximize = game.state(s).owner == Owner::maximizer;
        int best = 0;
        double best_val = action_value(game, values, s, 0);
        for (int a = 1; a < game.num_actions(s); ++a) {
            double v = action_value(game, values, s, a);
            if (maximize ? v > best_val : v < best_val) {
                best = a;
                best_val = v;
            }
        }
        (maximize ? sigma : tau).choice[s] = best;
    }
    return {std::move(sigma), std::move(tau)};
}

}  // namespace sg
