#include "funcol/deps.hpp"

#include <algorithm>

namespace funcol {

std::string node_name(const Node& n) {
    if (auto* t = std::get_if<Table*>(&n))
        return (*t)->name();
    return std::get<Column*>(n)->qualified_name();
}

std::uint64_t node_seq(const Node& n) {
    return std::visit([](auto* p) { return p->creation_seq(); }, n);
}

bool node_dirty(const Node& n) {
    return std::visit([](auto* p) { return p->dirty(); }, n);
}

void set_node_dirty(const Node& n, bool dirty) {
    std::visit([dirty](auto* p) { p->set_dirty(dirty); }, n);
}

bool is_evaluatable(const Node& n) {
    if (auto* t = std::get_if<Table*>(&n))
        return (*t)->is_derived();
    return true;
}

namespace {

void add(std::vector<Node>& out, Node n) {
    if (std::find(out.begin(), out.end(), n) == out.end())
        out.push_back(n);
}

void add_path_columns(std::vector<Node>& out, const ColumnPath& path) {
    for (Column* c : path.segments())
        add(out, Node(c));
}

} // namespace

std::vector<Node> direct_dependencies(const Node& n) {
    std::vector<Node> out;
    if (auto* tp = std::get_if<Table*>(&n)) {
        Table* t = *tp;
        if (const ProductDef* def = t->product_def()) {
            for (Column* dim : def->dimensions)
                add(out, Node(&dim->output()));
            // The head dimension of each predicate path is bound during
            // enumeration, so only the tails are prerequisites.
            for (const auto& param : def->predicate_params)
                if (!param.tail.empty())
                    add_path_columns(out, param.tail);
        } else if (Column* via = t->populated_by()) {
            add(out, Node(&via->input()));
            for (const ColumnPath& p : via->project_def()->input_keys)
                add_path_columns(out, p);
        }
        return out;
    }

    Column* c = std::get<Column*>(n);
    Table& input = c->input();
    // A derived-kind column without an installed definition is just NULL data.
    switch (c->kind()) {
    case ColumnKind::Stored:
        if (input.is_derived())
            add(out, Node(&input)); // filled alongside the population
        break;
    case ColumnKind::ProductAttribute:
        add(out, Node(&input));
        break;
    case ColumnKind::Calculate: {
        add(out, Node(&input));
        if (const CalculateDef* def = c->calculate_def())
            for (const ColumnPath& p : def->params)
                add_path_columns(out, p);
        break;
    }
    case ColumnKind::Link: {
        add(out, Node(&input));
        add(out, Node(&c->output()));
        if (const LinkDef* def = c->link_def()) {
            for (const ColumnPath& p : def->input_keys)
                add_path_columns(out, p);
            for (Column* k : def->output_keys)
                add(out, Node(k));
        }
        break;
    }
    case ColumnKind::Project: {
        add(out, Node(&input));
        add(out, Node(&c->output()));
        if (const ProjectDef* def = c->project_def()) {
            for (const ColumnPath& p : def->input_keys)
                add_path_columns(out, p);
            for (Column* k : def->output_keys)
                add(out, Node(k));
        }
        break;
    }
    case ColumnKind::Accumulate: {
        add(out, Node(&input));
        if (const AccumulateDef* def = c->accumulate_def()) {
            add(out, Node(&def->group.input())); // the fact table
            add_path_columns(out, def->group);
            for (const ColumnPath& p : def->fact_params)
                add_path_columns(out, p);
        }
        break;
    }
    }
    return out;
}

} // namespace funcol
