#include "rlang/document.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "json.hpp"

namespace rlang {

using Json = nlohmann::ordered_json;

namespace {

Error bad(const std::string& why) { return Error(ErrorKind::parse, "document: " + why); }

// Variable numbering for expressions: global binder ids map to 0, 1, ...
// in order of appearance. Automata and grammars keep their local numbering.
struct VarMap {
    bool renumber = false;
    std::map<int, int> ids;

    int out(int v) {
        if (!renumber) return v;
        auto [it, fresh] = ids.emplace(v, static_cast<int>(ids.size()));
        return it->second;
    }
    int in(int v) {
        if (!renumber) return v;
        auto it = ids.find(v);
        if (it == ids.end()) it = ids.emplace(v, new_var()).first;
        return it->second;
    }
};

Json term_json(const Term& t, VarMap& vm) {
    if (t.is_var()) return Json{{"var", vm.out(t.var)}};
    return Json{{"atom", atom_name(t.atom)}};
}

Term term_of(const Json& j, VarMap& vm) {
    if (j.contains("var")) {
        int v = j.at("var").get<int>();
        if (v < 0) throw bad("negative variable");
        return Term::v(vm.in(v));
    }
    return Term::c(atom(j.at("atom").get<std::string>()));
}

Json constraint_json(const Constraint& c, VarMap& vm) {
    using K = Constraint::Kind;
    switch (c.kind()) {
        case K::truth:
            return true;
        case K::falsity:
            return false;
        case K::eq:
            return Json{{"eq", Json::array({term_json(c.lhs(), vm), term_json(c.rhs(), vm)})}};
        case K::neg:
            return Json{{"not", constraint_json(c.children()[0], vm)}};
        case K::conj:
        case K::disj: {
            Json kids = Json::array();
            for (auto& k : c.children()) kids.push_back(constraint_json(k, vm));
            return Json{{c.kind() == K::conj ? "and" : "or", kids}};
        }
    }
    return true;
}

Constraint constraint_of(const Json& j, VarMap& vm) {
    if (j.is_boolean()) return j.get<bool>() ? Constraint::top() : Constraint::bottom();
    if (!j.is_object() || j.size() != 1) throw bad("constraint must be a boolean or a one-key object");
    auto& [key, val] = *j.items().begin();
    if (key == "eq") {
        if (!val.is_array() || val.size() != 2) throw bad("eq takes two terms");
        return Constraint::eq(term_of(val[0], vm), term_of(val[1], vm));
    }
    if (key == "not") return Constraint::neg(constraint_of(val, vm));
    if (key == "and" || key == "or") {
        std::vector<Constraint> kids;
        for (auto& k : val) kids.push_back(constraint_of(k, vm));
        return key == "and" ? Constraint::all(std::move(kids)) : Constraint::any(std::move(kids));
    }
    throw bad("unknown constraint operator " + key);
}

Json atom_list(const std::vector<Atom>& as) {
    Json j = Json::array();
    for (Atom a : as) j.push_back(atom_name(a));
    return j;
}

std::vector<Atom> atoms_from(const Json& j) {
    std::vector<Atom> out;
    for (auto& x : j) out.push_back(atom(x.get<std::string>()));
    return out;
}

// Sets are ordered by interning id, which varies between processes; names do not.
Json label_list(const std::set<Label>& ls) {
    std::vector<std::string> names;
    for (Label l : ls) names.push_back(label_name(l));
    std::sort(names.begin(), names.end());
    return Json(names);
}

std::set<Label> labels_from(const Json& j) {
    std::set<Label> out;
    for (auto& x : j) out.insert(label(x.get<std::string>()));
    return out;
}

Json registers_json(const std::vector<std::optional<Atom>>& r0) {
    Json j = Json::array();
    for (auto& a : r0) j.push_back(a ? Json(atom_name(*a)) : Json(nullptr));
    return j;
}

std::vector<std::optional<Atom>> registers_from(const Json& j) {
    std::vector<std::optional<Atom>> out;
    for (auto& x : j) out.push_back(x.is_null() ? std::nullopt : std::optional(atom(x.get<std::string>())));
    return out;
}

Json header(const char* kind) {
    Json j;
    j["kind"] = kind;
    j["version"] = document_version;
    return j;
}

int index_of(const std::vector<std::string>& names, const std::string& n, const char* what) {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == n) return static_cast<int>(i);
    throw bad(std::string("unknown ") + what + " " + n);
}

Json expr_json(const RatExpr& e, VarMap& vm) {
    using K = RatExpr::Kind;
    Json j;
    switch (e.kind()) {
        case K::zero:
            j["op"] = "zero";
            break;
        case K::single: {
            j["op"] = "single";
            j["items"] = Json::array();
            for (auto& it : e.tmpl().items)
                j["items"].push_back(Json{{"label", label_name(it.label)}, {"atom", term_json(it.atom, vm)}, {"count", it.count}});
            break;
        }
        case K::sum:
            j["op"] = "sum";
            j["parts"] = Json::array();
            for (auto& k : e.kids()) j["parts"].push_back(expr_json(k, vm));
            break;
        case K::star:
            j["op"] = "star";
            j["body"] = expr_json(e.kids()[0], vm);
            break;
        case K::onion: {
            j["op"] = "union";
            j["binders"] = Json::array();
            for (int b : e.binders()) j["binders"].push_back(vm.out(b));
            j["names"] = e.binder_names();
            j["guard"] = constraint_json(e.guard(), vm);
            j["bodies"] = Json::array();
            for (auto& k : e.kids()) j["bodies"].push_back(expr_json(k, vm));
            break;
        }
        case K::external:
            throw Error(ErrorKind::form, "computed set " + e.ext()->describe() + " has no document form");
    }
    return j;
}

RatExpr expr_of(const Json& j, VarMap& vm) {
    auto op = j.at("op").get<std::string>();
    if (op == "zero") return RatExpr::zero();
    if (op == "single") {
        VecTemplate t;
        for (auto& it : j.at("items")) {
            int n = it.at("count").get<int>();
            if (n < 1) throw bad("template counts are positive");
            t.add(label(it.at("label").get<std::string>()), term_of(it.at("atom"), vm), n);
        }
        return RatExpr::single(t);
    }
    if (op == "sum") {
        std::vector<RatExpr> parts;
        for (auto& k : j.at("parts")) parts.push_back(expr_of(k, vm));
        return RatExpr::sum(std::move(parts));
    }
    if (op == "star") return RatExpr::star(expr_of(j.at("body"), vm));
    if (op == "union") {
        std::vector<int> binders;
        for (auto& b : j.at("binders")) binders.push_back(vm.in(b.get<int>()));
        auto guard = constraint_of(j.at("guard"), vm);
        std::vector<RatExpr> bodies;
        for (auto& k : j.at("bodies")) bodies.push_back(expr_of(k, vm));
        return RatExpr::onion(std::move(binders), guard, std::move(bodies), j.at("names").get<std::vector<std::string>>());
    }
    throw bad("unknown expression operator " + op);
}

Fma automaton_of(const Json& j) {
    Fma a;
    a.r = j.at("registers").get<int>();
    a.states = j.at("states").get<std::vector<std::string>>();
    a.init = index_of(a.states, j.at("initial").get<std::string>(), "state");
    for (auto& s : j.at("accepting")) a.accepting.insert(index_of(a.states, s.get<std::string>(), "state"));
    a.labels = labels_from(j.at("labels"));
    a.constants = atoms_from(j.at("constants"));
    a.r0 = registers_from(j.at("initial_registers"));
    VarMap local;
    for (auto& rj : j.at("rules")) {
        Rule rl;
        rl.src = index_of(a.states, rj.at("from").get<std::string>(), "state");
        rl.dst = index_of(a.states, rj.at("to").get<std::string>(), "state");
        for (auto& l : rj.at("block")) rl.block.push_back(label(l.get<std::string>()));
        rl.phi = constraint_of(rj.at("guard"), local);
        a.rules.push_back(rl);
    }
    a.validate();
    return a;
}

Rcfg grammar_of(const Json& j) {
    Rcfg g;
    g.r = j.at("registers").get<int>();
    g.vars = j.at("nonterminals").get<std::vector<std::string>>();
    g.start = index_of(g.vars, j.at("start").get<std::string>(), "nonterminal");
    g.labels = labels_from(j.at("labels"));
    g.constants = atoms_from(j.at("constants"));
    g.r0 = registers_from(j.at("initial_registers"));
    VarMap local;
    for (auto& pj : j.at("productions")) {
        Production p;
        p.head = index_of(g.vars, pj.at("head").get<std::string>(), "nonterminal");
        p.phi = constraint_of(pj.at("guard"), local);
        for (auto& s : pj.at("body")) {
            if (s.contains("label"))
                p.body.push_back(Symbol::lab(label(s.at("label").get<std::string>())));
            else if (s.contains("constant"))
                p.body.push_back(Symbol::con(atom(s.at("constant").get<std::string>())));
            else
                p.body.push_back(Symbol::nt(index_of(g.vars, s.at("nonterminal").get<std::string>(), "nonterminal")));
        }
        g.prods.push_back(p);
    }
    g.validate();
    return g;
}

}  // namespace

std::string to_document(const Fma& a) {
    Json j = header("automaton");
    VarMap local;
    j["registers"] = a.r;
    j["states"] = a.states;
    j["initial"] = a.states.at(a.init);
    j["accepting"] = Json::array();
    for (int s : a.accepting) j["accepting"].push_back(a.states.at(s));
    j["labels"] = label_list(a.labels);
    j["constants"] = atom_list(a.constants);
    j["initial_registers"] = registers_json(a.r0);
    j["rules"] = Json::array();
    for (auto& rl : a.rules) {
        Json rj;
        rj["from"] = a.states.at(rl.src);
        rj["block"] = Json::array();
        for (Label l : rl.block) rj["block"].push_back(label_name(l));
        rj["guard"] = constraint_json(rl.phi, local);
        rj["to"] = a.states.at(rl.dst);
        j["rules"].push_back(rj);
    }
    return j.dump(2);
}

std::string to_document(const Rcfg& g) {
    Json j = header("grammar");
    VarMap local;
    j["registers"] = g.r;
    j["nonterminals"] = g.vars;
    j["start"] = g.vars.at(g.start);
    j["labels"] = label_list(g.labels);
    j["constants"] = atom_list(g.constants);
    j["initial_registers"] = registers_json(g.r0);
    j["productions"] = Json::array();
    for (auto& p : g.prods) {
        Json pj;
        pj["head"] = g.vars.at(p.head);
        pj["guard"] = constraint_json(p.phi, local);
        pj["body"] = Json::array();
        for (auto& s : p.body) {
            switch (s.kind) {
                case Symbol::Kind::label:
                    pj["body"].push_back(Json{{"label", label_name(s.id)}});
                    break;
                case Symbol::Kind::constant:
                    pj["body"].push_back(Json{{"constant", atom_name(Atom{s.id})}});
                    break;
                case Symbol::Kind::nonterminal:
                    pj["body"].push_back(Json{{"nonterminal", g.vars.at(s.id)}});
                    break;
            }
        }
        j["productions"].push_back(pj);
    }
    return j.dump(2);
}

std::string to_document(const RatExpr& e) {
    Json j = header("expression");
    VarMap vm{true, {}};
    j["expression"] = expr_json(e, vm);
    return j.dump(2);
}

std::string to_document(const ThetaSet& s) {
    Json j = header("theta-set");
    j["p"] = s.p;
    j["elements"] = Json::array();
    std::vector<std::pair<std::string, std::vector<std::string>>> rows;
    for (auto& e : s.elems) {
        auto& row = rows.emplace_back(atom_name(e.a), std::vector<std::string>{});
        for (Atom b : e.B) row.second.push_back(atom_name(b));
        std::sort(row.second.begin(), row.second.end());
    }
    std::sort(rows.begin(), rows.end());
    for (auto& [a, bs] : rows) j["elements"].push_back(Json::array({a, Json(bs)}));
    return j.dump(2);
}

std::string to_document(const PairWord& w) {
    Json j = header("anti-path");
    j["letters"] = Json::array();
    for (auto& [b, a] : w) j["letters"].push_back(Json::array({atom_name(b), atom_name(a)}));
    return j.dump(2);
}

std::string to_document(const IntervalTreeInstance& inst) { return interval_document(inst); }

DocumentObject parse_document(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw bad(e.what());
    }
    if (!j.is_object() || !j.contains("kind")) throw bad("missing kind");
    std::string kind = j["kind"].is_string() ? j["kind"].get<std::string>() : "";
    if (kind == "interval-instance") return parse_interval_document(text);
    if (!j.contains("version") || j["version"] != document_version) throw bad("unsupported version");
    try {
        if (kind == "automaton") return automaton_of(j);
        if (kind == "grammar") return grammar_of(j);
        if (kind == "expression") {
            VarMap vm{true, {}};
            return expr_of(j.at("expression"), vm);
        }
        if (kind == "theta-set") {
            ThetaSet s(j.at("p").get<int>());
            for (auto& e : j.at("elements")) {
                auto B = atoms_from(e.at(1));
                s.insert(ThetaElem(atom(e.at(0).get<std::string>()), {B.begin(), B.end()}));
            }
            return s;
        }
        if (kind == "anti-path") {
            PairWord w;
            for (auto& l : j.at("letters")) w.emplace_back(atom(l.at(0).get<std::string>()), atom(l.at(1).get<std::string>()));
            return w;
        }
    } catch (const nlohmann::json::exception& e) {
        throw bad(kind + ": " + e.what());
    } catch (const Error& e) {
        throw bad(kind + ": " + e.what());
    }
    throw bad("unknown kind " + kind);
}

std::string document_kind(const DocumentObject& d) {
    static const char* names[] = {"automaton", "grammar", "expression", "theta-set", "anti-path", "interval-instance"};
    return names[d.index()];
}

}  // namespace rlang
