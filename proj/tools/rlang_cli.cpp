// rlang: command-line front end. Exit codes: 0 success/equal/valid,
// 1 unequal/invalid (with a report), 2 usage, parse or input errors.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rlang/automata.hpp"
#include "rlang/document.hpp"
#include "rlang/grammar.hpp"
#include "rlang/oracle.hpp"
#include "rlang/ratset.hpp"
#include "rlang/separation.hpp"
#include "rlang/suites.hpp"
#include "rlang/surgery.hpp"
#include "rlang/theta.hpp"

using namespace rlang;
using Json = nlohmann::ordered_json;

namespace {

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Text report on stdout, optionally followed by a machine-readable block.
struct Report {
    std::ostringstream text;
    Json data = Json::object();
    bool json = false;

    int finish(int code) {
        std::cout << text.str();
        if (json) {
            data["exit"] = code;
            std::cout << "--- json\n" << data.dump(2) << "\n";
        }
        return code;
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Usage("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<int> parse_params(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ','))
        try {
            out.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw Usage("bad parameter " + part);
        }
    return out;
}

// A language or vector-set object: builtin:NAME[:params], automaton:NAME,
// grammar:NAME, expression:NAME, predicate:sep_parse, or a document path.
struct Source {
    std::string name;
    std::optional<Fma> automaton;
    std::optional<Rcfg> grammar;
    std::optional<RatExpr> expression;
    std::optional<Provider> predicate;

    Provider provider() const {
        if (automaton) return Provider::of(*automaton, name);
        if (grammar) return Provider::of(*grammar, name);
        if (expression) return Provider::of(*expression, name);
        return *predicate;
    }
    std::set<Atom> constants() const { return provider().constants; }
};

bool contains(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

Source load_source(const std::string& spec) {
    Source s;
    s.name = spec;
    auto colon = spec.find(':');
    std::string scheme = colon == std::string::npos ? "" : spec.substr(0, colon);
    if (scheme == "builtin" || scheme == "automaton" || scheme == "grammar" || scheme == "expression") {
        std::string rest = spec.substr(colon + 1);
        auto c2 = rest.find(':');
        std::string name = rest.substr(0, c2);
        std::vector<int> params = c2 == std::string::npos ? std::vector<int>{} : parse_params(rest.substr(c2 + 1));
        bool any = scheme == "builtin";
        if ((any || scheme == "automaton") && contains(builtin_automaton_names(), name))
            s.automaton = builtin_automaton(name);
        else if ((any || scheme == "grammar") && contains(builtin_grammar_names(), name))
            s.grammar = builtin_grammar(name, params);
        else if ((any || scheme == "expression") &&
                 contains({"par_two", "par_first", "par_mirror", "R_example", "gsh"}, name))
            s.expression = builtin_expression(name, params);
        else
            throw Usage("unknown builtin " + spec);
        return s;
    }
    if (scheme == "predicate") {
        if (spec != "predicate:sep_parse") throw Usage("unknown predicate " + spec);
        s.predicate = Provider::words("sep_parse", [](const DataWord& w) { return sep_parse(w).has_value(); }, {separator()});
        return s;
    }
    auto doc = parse_document(read_file(spec));
    if (auto* a = std::get_if<Fma>(&doc))
        s.automaton = *a;
    else if (auto* g = std::get_if<Rcfg>(&doc))
        s.grammar = *g;
    else if (auto* e = std::get_if<RatExpr>(&doc))
        s.expression = *e;
    else
        throw Usage(spec + " holds a " + document_kind(doc) + ", not a language");
    return s;
}

// "4" gives a, b, c, d; otherwise a comma list of atom names. Constants of
// the objects involved are added.
Universe parse_universe(const std::string& text, const std::set<Atom>& constants) {
    std::set<Atom> u;
    bool digits = !text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); });
    if (digits) {
        for (Atom a : named_universe(std::stoi(text))) u.insert(a);
    } else {
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ','))
            if (!part.empty()) u.insert(atom(part));
    }
    u.insert(constants.begin(), constants.end());
    return make_universe(u);
}

Json names_of(const Universe& u) {
    Json j = Json::array();
    for (Atom a : u) j.push_back(atom_name(a));
    return j;
}

std::string show(const DataWord& w) { return w.empty() ? "<empty>" : to_string(w); }

PairWord load_pair_word(const std::string& text) {
    if (std::filesystem::exists(text)) {
        auto doc = parse_document(read_file(text));
        if (auto* w = std::get_if<PairWord>(&doc)) return *w;
        throw Usage(text + " is not an anti-path document");
    }
    return parse_pair_word(text);
}

ThetaSet load_theta(const std::string& text) {
    if (std::filesystem::exists(text)) {
        auto doc = parse_document(read_file(text));
        if (auto* s = std::get_if<ThetaSet>(&doc)) return *s;
        throw Usage(text + " is not a theta-set document");
    }
    return parse_theta(text);
}

ThetaSeq parse_theta_seq(const std::string& text) {
    ThetaSeq seq;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ';')) {
        if (part.find_first_not_of(" \t") == std::string::npos) continue;
        auto one = parse_theta(part);
        seq.push_back(*one.elems.begin());
    }
    return seq;
}

void print_run(std::ostream& os, const Fma& a, const Run& run) {
    os << "run: " << to_string(a, run.start);
    for (auto& st : run.steps) os << " -" << show(st.block) << "-> " << to_string(a, st.to);
    os << "\n";
}

IntervalTreeInstance load_instance(const std::string& path) {
    auto doc = parse_document(read_file(path));
    if (auto* i = std::get_if<IntervalTreeInstance>(&doc)) return *i;
    throw Usage(path + " is not an interval-instance document");
}

void report_instance(Report& r, const IntervalTreeInstance& inst) {
    bool valid = interval_validate(inst);
    int overlap = interval_max_overlap(inst);
    bool connected = subtree_unions_connected(inst);
    r.text << (valid ? "valid" : "invalid") << "\nmax overlap: " << overlap
           << "\nsubtree unions connected: " << (connected ? "yes" : "no") << "\n";
    r.data["valid"] = valid;
    r.data["max_overlap"] = overlap;
    r.data["subtree_unions_connected"] = connected;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rlang: data languages, register automata and rational sets of data vectors"};
    app.require_subcommand(1);
    app.fallthrough();
    Report report;
    std::uint64_t seed = 0;
    app.add_flag("--json", report.json, "append a machine-readable block");
    app.add_option("--seed", seed, "seed for randomised commands")->capture_default_str();

    std::string in, a_spec, b_spec, universe_text, word_text, vector_text, kind, out_path, set_text, seq_text, op,
        sigma_text, rho_text, model, file, tau_text, emit, suite;
    int max_len = -1, max_size = -1, k = 1, C = 2, M = 0, depth = 1, states = 1, ak = 1;
    long long budget = 1000;
    bool parikh_flag = false, words_flag = false, list_flag = false, all_flag = false, search_flag = false,
         random_flag = false, controlled = false;

    auto* en = app.add_subcommand("enum", "enumerate a language or its Parikh image");
    en->add_option("--in", in, "object")->required();
    en->add_option("--universe", universe_text, "atom count or comma list")->required();
    auto* en_len = en->add_option("--max-len", max_len, "word length bound");
    auto* en_size = en->add_option("--max-size", max_size, "vector size bound");
    en_len->excludes(en_size);

    auto* mem = app.add_subcommand("member", "word or vector membership");
    mem->add_option("--in", in, "object")->required();
    auto* mem_w = mem->add_option("--word", word_text, "spaced letters, e.g. \"a h:b\"");
    auto* mem_v = mem->add_option("--vector", vector_text, "e.g. \"2a b\"");
    mem_w->excludes(mem_v);

    auto* conv = app.add_subcommand("convert", "convert to restricted form");
    conv->add_option("--in", in, "object")->required();
    conv->add_option("--kind", kind, "fma or cfg")->required()->check(CLI::IsMember({"fma", "cfg"}));
    conv->add_option("--out", out_path, "write the document here");
    conv->add_option("--universe", universe_text, "check Parikh equality over this universe");
    conv->add_option("--max-size", max_size, "bound for the check");

    auto* eq = app.add_subcommand("equiv", "bounded equality of two objects");
    eq->add_option("--a", a_spec, "first object")->required();
    eq->add_option("--b", b_spec, "second object")->required();
    eq->add_flag("--parikh", parikh_flag, "compare Parikh images");
    eq->add_flag("--words", words_flag, "compare languages");
    eq->add_option("--universe", universe_text, "atom count or comma list")->required();
    eq->add_option("--max-size", max_size, "vector size bound");
    eq->add_option("--max-len", max_len, "word length bound");

    auto* th = app.add_subcommand("theta", "restraint, control, compact subset, matching");
    th->add_option("--set", set_text, "literal \"(a,{b}); (c,{d})\" or a theta-set document")->required();
    th->add_option("--op", op, "restraint, control, compact or matching")
        ->required()
        ->check(CLI::IsMember({"restraint", "control", "compact", "matching"}));
    th->add_flag("--controlled", controlled, "matching must keep the set's good control");

    auto* su = app.add_subcommand("surgery", "anti-path classification, insertion, shortening, identities");
    su->add_option("--op", op, "classify, insert, shorten or identity")
        ->required()
        ->check(CLI::IsMember({"classify", "insert", "shorten", "identity"}));
    su->add_option("--sigma", sigma_text, "anti-path literal \"(b0,a1)(b1,a2)\" or document");
    su->add_option("--rho", rho_text, "anti-cycle to insert");
    su->add_option("--kind", kind, "unrestrained, restrained or qchi")
        ->check(CLI::IsMember({"unrestrained", "restrained", "qchi"}));
    su->add_option("--universe", universe_text, "atom count");
    su->add_option("--max-size", max_size, "size bound");
    su->add_option("--states", states, "states (qchi)");
    su->add_option("--k", ak, "set size (qchi)");

    auto* sy = app.add_subcommand("synth", "star-height-two Parikh expression of an automaton");
    sy->add_option("--in", in, "automaton")->required();
    sy->add_option("--universe", universe_text, "check against the automaton over this universe");
    sy->add_option("--max-size", max_size, "bound for the check");

    auto* st = app.add_subcommand("stability", "commutative stability check");
    st->add_option("--model", model, "sep or g3")->required()->check(CLI::IsMember({"sep", "g3"}));
    st->add_option("--k", k, "blocks (sep)");
    st->add_option("--C", C, "perturbation size bound");
    st->add_option("--M", M, "counter base (g3); default 3k+2");
    st->add_option("--depth", depth, "tree depth (g3)");

    auto* iv = app.add_subcommand("intervals", "interval-tree instances");
    auto* iv_val = iv->add_option("--validate", file, "instance document");
    auto* iv_ov = iv->add_option("--overlap", file, "instance document");
    auto* iv_search = iv->add_flag("--search", search_flag, "search for a low-overlap instance");
    auto* iv_rand = iv->add_flag("--random", random_flag, "emit a random valid instance");
    iv_val->excludes(iv_ov)->excludes(iv_search)->excludes(iv_rand);
    iv_search->excludes(iv_rand);
    iv->add_option("--depth", depth, "tree depth");
    iv->add_option("--budget", budget, "random instances for deep searches");

    auto* pu = app.add_subcommand("pump", "pump a frequent letter of an accepted word");
    pu->add_option("--in", in, "automaton")->required();
    pu->add_option("--word", word_text, "accepted word")->required();
    pu->add_option("--tau", tau_text, "letter to pump")->required();

    auto* bi = app.add_subcommand("builtin", "list or emit named objects");
    auto* bi_list = bi->add_flag("--list", list_flag, "list names");
    auto* bi_emit = bi->add_option("--emit", emit, "object spec, e.g. builtin:gsh:2");
    bi_list->excludes(bi_emit);

    auto* ve = app.add_subcommand("verify", "run a named acceptance suite");
    auto* ve_suite = ve->add_option("--suite", suite, "suite name");
    auto* ve_all = ve->add_flag("--all", all_flag, "run every suite");
    ve_suite->excludes(ve_all);
    auto* ve_list = ve->add_flag("--list", list_flag, "list suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto& r = report;
    try {
        if (*en) {
            auto src = load_source(in);
            auto u = parse_universe(universe_text, src.constants());
            r.data["universe"] = names_of(u);
            if (max_len >= 0) {
                auto ws = provider_words(src.provider(), u, max_len);
                std::vector<DataWord> sorted(ws.begin(), ws.end());
                std::sort(sorted.begin(), sorted.end(), word_before);
                Json arr = Json::array();
                for (auto& w : sorted) {
                    r.text << show(w) << "\n";
                    arr.push_back(show(w));
                }
                r.text << sorted.size() << " words\n";
                r.data["words"] = arr;
            } else if (max_size >= 0) {
                auto vs = provider_vectors(src.provider(), u, max_size);
                Json arr = Json::array();
                for (auto& v : vs) {
                    r.text << to_string(v) << "\n";
                    arr.push_back(to_string(v));
                }
                r.text << vs.size() << " vectors\n";
                r.data["vectors"] = arr;
            } else {
                throw Usage("enum needs --max-len or --max-size");
            }
            return r.finish(0);
        }

        if (*mem) {
            auto src = load_source(in);
            bool member = false;
            if (!word_text.empty() || mem_w->count()) {
                auto w = word_of(word_text);
                if (src.automaton) {
                    auto run = accepts(*src.automaton, w);
                    member = run.has_value();
                    if (run) print_run(r.text, *src.automaton, *run);
                } else {
                    auto atoms = atoms_of(w);
                    auto u = parse_universe("", src.constants());
                    std::set<Atom> all(u.begin(), u.end());
                    all.insert(atoms.begin(), atoms.end());
                    member = provider_words(src.provider(), make_universe(all), static_cast<int>(w.size())).count(w) > 0;
                }
                r.data["word"] = show(w);
            } else if (mem_v->count()) {
                auto v = vector_of(vector_text);
                if (src.expression) {
                    member = contains(*src.expression, v);
                } else {
                    std::set<Atom> all = v.atoms();
                    auto cs = src.constants();
                    all.insert(cs.begin(), cs.end());
                    member = provider_vectors(src.provider(), make_universe(all), v.size()).count(v) > 0;
                }
                r.data["vector"] = to_string(v);
            } else {
                throw Usage("member needs --word or --vector");
            }
            r.text << (member ? "member" : "not a member") << "\n";
            r.data["member"] = member;
            return r.finish(member ? 0 : 1);
        }

        if (*conv) {
            auto src = load_source(in);
            std::string doc;
            bool equal = true;
            auto check = [&](const Provider& before, const Provider& after) {
                if (universe_text.empty()) return;
                auto u = parse_universe(universe_text, before.constants);
                auto v = parikh_equal_bounded(before, after, u, max_size < 0 ? 4 : max_size);
                equal = v.equal;
                r.text << "Parikh check: " << to_string(v) << "\n";
                r.data["check"] = to_string(v);
            };
            if (kind == "fma") {
                if (!src.automaton) throw Usage("--kind fma needs an automaton");
                auto ra = to_restricted(*src.automaton);
                doc = to_document(ra);
                r.text << "restricted: " << ra.states.size() << " states, " << ra.rules.size() << " rules\n";
                check(src.provider(), Provider::of(ra, "restricted"));
            } else {
                if (!src.grammar) throw Usage("--kind cfg needs a grammar");
                auto rg = to_restricted_cfg(*src.grammar);
                doc = to_document(rg);
                r.text << "restricted: " << rg.vars.size() << " nonterminals, " << rg.prods.size() << " productions\n";
                check(src.provider(), Provider::of(rg, "restricted"));
            }
            if (out_path.empty()) {
                r.text << doc << "\n";
            } else {
                std::ofstream(out_path) << doc << "\n";
                r.text << "wrote " << out_path << "\n";
            }
            return r.finish(equal ? 0 : 1);
        }

        if (*eq) {
            auto x = load_source(a_spec), y = load_source(b_spec);
            auto cs = x.constants();
            auto cy = y.constants();
            cs.insert(cy.begin(), cy.end());
            auto u = parse_universe(universe_text, cs);
            bool words = words_flag || (!parikh_flag && max_len >= 0);
            Verdict v;
            if (words) {
                if (max_len < 0) throw Usage("--words needs --max-len");
                v = language_equal_bounded(x.provider(), y.provider(), u, max_len);
            } else {
                if (max_size < 0) throw Usage("--parikh needs --max-size");
                v = parikh_equal_bounded(x.provider(), y.provider(), u, max_size);
            }
            r.text << (words ? "languages" : "Parikh images") << " over " << names_of(u).dump() << ": " << to_string(v) << "\n";
            r.data["equal"] = v.equal;
            r.data["mode"] = words ? "words" : "parikh";
            r.data["sizes"] = {v.first_size, v.second_size};
            if (v.vector_witness) r.data["witness"] = to_string(*v.vector_witness);
            if (v.word_witness) r.data["witness"] = show(*v.word_witness);
            if (!v.equal) r.data["witness_side"] = v.witness_in_first ? "a" : "b";
            return r.finish(v.equal ? 0 : 1);
        }

        if (*th) {
            if (op == "matching") {
                auto seq = parse_theta_seq(set_text);
                std::optional<Control> c;
                if (controlled) {
                    ThetaSet s(static_cast<int>(seq.at(0).B.size()));
                    for (auto& e : seq) s.insert(e);
                    c = good_control(s);
                    r.text << "control: " << to_string(*c) << "\n";
                }
                auto m = find_matching(seq, c);
                if (m) {
                    r.text << "matching: " << m->first << " " << m->second << "  " << to_string(seq[m->first]) << " "
                           << to_string(seq[m->second]) << "\n";
                    r.data["matching"] = {m->first, m->second};
                } else {
                    r.text << "no matching\n";
                }
                return r.finish(m ? 0 : 1);
            }
            auto s = load_theta(set_text);
            r.text << "set: " << to_string(s) << "\n";
            if (op == "restraint") {
                auto res = find_restraint(s);
                if (res) {
                    std::vector<Atom> W = res->W;
                    r.text << "restrained by z=" << atom_name(res->z) << " W=" << names_of(W).dump() << "\n";
                    r.data["restraint"] = {{"z", atom_name(res->z)}, {"W", names_of(W)}};
                } else {
                    r.text << "unrestrained\n";
                }
                r.data["restrained"] = res.has_value();
                return r.finish(0);
            }
            auto c = good_control(s);
            r.text << "good control: " << to_string(c) << "\n";
            r.data["control"] = to_string(c);
            if (op == "compact") {
                auto small = compact_subset(s, c);
                r.text << "compact subset (" << small.size() << " <= " << compact_bound(s.p, c) << "): " << to_string(small)
                       << "\n";
                r.data["compact"] = to_string(small);
            }
            return r.finish(0);
        }

        if (*su) {
            if (op == "identity") {
                if (kind.empty() || universe_text.empty() || max_size < 0)
                    throw Usage("identity needs --kind, --universe and --max-size");
                auto ik = kind == "unrestrained" ? IdentityKind::unrestrained_ap
                          : kind == "restrained" ? IdentityKind::restrained_ap
                                                 : IdentityKind::qchi;
                auto v = semilinear_identity_check(ik, parse_universe(universe_text, {}), max_size, {states, ak});
                r.text << kind << " identity: " << (v.equal ? "equal" : "unequal") << " (" << v.lhs << " vs " << v.rhs
                       << " orbits)\n";
                if (!v.equal) r.text << "counterexample on " << v.side << ": " << v.counterexample << "\n";
                r.data["equal"] = v.equal;
                return r.finish(v.equal ? 0 : 1);
            }
            if (sigma_text.empty()) throw Usage(op + " needs --sigma");
            auto sigma = load_pair_word(sigma_text);
            if (op == "classify") {
                auto c = antipath_classify(sigma);
                r.text << to_string(c) << "\n";
                r.data["class"] = to_string(c);
                return r.finish(0);
            }
            if (op == "insert") {
                if (rho_text.empty()) throw Usage("insert needs --rho");
                auto out = antipath_insert(sigma, load_pair_word(rho_text));
                r.text << to_string(out) << "\n";
                r.data["word"] = to_string(out);
                return r.finish(0);
            }
            auto sh = antipath_shorten(sigma);
            r.text << "removed: " << to_string(sh.removed) << "\nresult: " << to_string(sh.word) << "\n";
            r.data["removed"] = to_string(sh.removed);
            r.data["word"] = to_string(sh.word);
            return r.finish(0);
        }

        if (*sy) {
            auto src = load_source(in);
            if (!src.automaton) throw Usage("synth needs an automaton");
            auto ra = is_restricted(*src.automaton) ? *src.automaton : to_restricted(*src.automaton);
            auto e = synth_language_parikh(ra);
            int h = syntactic_star_height(e);
            r.text << "star height: " << h << "\n" << e.to_string() << "\n";
            r.data["star_height"] = h;
            bool equal = true;
            if (!universe_text.empty()) {
                auto u = parse_universe(universe_text, src.constants());
                auto v = parikh_equal_bounded(Provider::of(e, "synthesised"), src.provider(), u, max_size < 0 ? 4 : max_size);
                r.text << "check: " << to_string(v) << "\n";
                r.data["check"] = to_string(v);
                equal = v.equal;
            }
            return r.finish(equal ? 0 : 1);
        }

        if (*st) {
            StabilityReport rep;
            if (model == "sep") {
                rep = stability_check(k, C, named_universe(2 * k + 3));
            } else {
                int m = M > 0 ? M : 3 * (g3_full_atoms(depth) + 1) + 2;
                r.text << "M: " << m << "\n";
                rep = g3_stability_check(depth, C, m);
            }
            r.text << "structure: " << rep.structure << "\nbase: " << to_string(rep.base) << "\nperturbations: " << rep.examined
                   << ", realisable: " << rep.cases.size() << "\n";
            Json cases = Json::array();
            for (auto& c : rep.cases) {
                r.text << "  w = " << (c.w.empty() ? "0" : to_string(c.w)) << ": " << c.witnesses.size() << " witnesses"
                       << (c.preserved ? "" : ", structure changed") << (c.propagates ? "" : ", no propagation") << "\n";
                cases.push_back({{"w", to_string(c.w)}, {"witnesses", c.witnesses}, {"preserved", c.preserved},
                                 {"propagates", c.propagates}});
            }
            r.text << "violations: " << rep.violations() << "\n";
            r.data["cases"] = cases;
            r.data["violations"] = rep.violations();
            return r.finish(rep.violations() == 0 ? 0 : 1);
        }

        if (*iv) {
            if (!file.empty()) {
                auto inst = load_instance(file);
                report_instance(r, inst);
                return r.finish(interval_validate(inst) ? 0 : 1);
            }
            r.text << "seed: " << seed << "\n";
            r.data["seed"] = seed;
            if (search_flag) {
                auto res = interval_search(depth, budget, seed);
                r.text << "depth " << depth << ": overlap " << res.achieved << (res.exhaustive ? " (optimal)" : " (best found)")
                       << " after " << res.examined << " candidates\n"
                       << to_document(res.instance) << "\n";
                r.data["achieved"] = res.achieved;
                r.data["exhaustive"] = res.exhaustive;
                return r.finish(0);
            }
            if (random_flag) {
                auto inst = random_interval_instance(depth, seed);
                report_instance(r, inst);
                r.text << to_document(inst) << "\n";
                return r.finish(0);
            }
            throw Usage("intervals needs --validate, --overlap, --search or --random");
        }

        if (*pu) {
            auto src = load_source(in);
            if (!src.automaton) throw Usage("pump needs an automaton");
            auto w = word_of(word_text);
            auto tau = word_of(tau_text);
            if (tau.size() != 1) throw Usage("--tau takes one letter");
            auto run = accepts(*src.automaton, w);
            if (!run) {
                r.text << "word not accepted\n";
                return r.finish(1);
            }
            auto p = pump_word(*src.automaton, w, *run, tau[0]);
            r.text << "bounds: f2=" << p.bounds.f2 << " f3=" << p.bounds.f3 << " f4=" << p.bounds.f4 << "\nsigma1: "
                   << show(p.sigma1) << "\nsigma2: " << show(p.sigma2) << "\nomega: " << show(p.omega)
                   << "\nsigma3: " << show(p.sigma3) << "\npumped: " << show(p.pumped) << "\npermutation order: " << p.order
                   << "\n";
            bool ok = accepts(*src.automaton, p.pumped).has_value();
            r.text << (ok ? "pumped word accepted" : "pumped word rejected") << "\n";
            r.data["omega"] = show(p.omega);
            r.data["pumped"] = show(p.pumped);
            r.data["accepted"] = ok;
            return r.finish(ok ? 0 : 1);
        }

        if (*bi) {
            if (list_flag || emit.empty()) {
                for (auto& n : builtin_automaton_names()) r.text << "automaton:" << n << "\n";
                for (auto& n : builtin_grammar_names()) r.text << "grammar:" << n << "\n";
                for (auto n : {"par_two", "par_first", "par_mirror", "R_example", "gsh"}) r.text << "expression:" << n << "\n";
                r.text << "predicate:sep_parse\n";
                return r.finish(0);
            }
            auto spec = emit.find(':') == std::string::npos ? "builtin:" + emit : emit;
            auto src = load_source(spec);
            if (src.automaton)
                r.text << to_document(*src.automaton) << "\n";
            else if (src.grammar)
                r.text << to_document(*src.grammar) << "\n";
            else if (src.expression)
                r.text << to_document(*src.expression) << "\n";
            else
                throw Usage("predicates have no document");
            return r.finish(0);
        }

        if (*ve) {
            if (list_flag) {
                for (auto& s : suite_list()) r.text << s.name << "  " << s.title << " (" << s.limit_seconds << " s)\n";
                return r.finish(0);
            }
            std::vector<std::string> names;
            if (all_flag)
                for (auto& s : suite_list()) names.push_back(s.name);
            else if (!suite.empty())
                names.push_back(suite);
            else
                throw Usage("verify needs --suite, --all or --list");
            bool all_pass = true;
            Json results = Json::array();
            for (auto& n : names) {
                auto res = run_suite(n);
                r.text << (res.passed ? "PASS " : "FAIL ") << n << " " << res.seconds << "s/" << res.limit_seconds << "s  "
                       << res.summary << "\n";
                for (auto& f : res.failures) r.text << "  " << f << "\n";
                results.push_back({{"suite", n}, {"passed", res.passed}, {"seconds", res.seconds}});
                all_pass = all_pass && res.passed;
            }
            r.data["results"] = results;
            return r.finish(all_pass ? 0 : 1);
        }
    } catch (const Usage& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error (" << error_kind_name(e.kind()) << "): " << e.what() << "\n";
        return 2;
    }
    return 2;
}
