#include "funcol/schema.hpp"

#include <algorithm>
#include <unordered_set>

#include "funcol/deps.hpp"
#include "funcol/error.hpp"

namespace funcol {

std::string_view errc_name(Errc code) {
    switch (code) {
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::ReservedName: return "ReservedName";
    case Errc::UnknownTable: return "UnknownTable";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::UnknownRow: return "UnknownRow";
    case Errc::NotPrimaryTable: return "NotPrimaryTable";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::DerivedColumnWrite: return "DerivedColumnWrite";
    case Errc::LexError: return "LexError";
    case Errc::ParseError: return "ParseError";
    case Errc::DivideByZero: return "DivideByZero";
    case Errc::UnboundPath: return "UnboundPath";
    case Errc::UnresolvedPath: return "UnresolvedPath";
    case Errc::TypeError: return "TypeError";
    case Errc::KeyArityMismatch: return "KeyArityMismatch";
    case Errc::GroupPathError: return "GroupPathError";
    case Errc::MissingAccumulator: return "MissingAccumulator";
    case Errc::NoDimensions: return "NoDimensions";
    case Errc::NotProjectedTable: return "NotProjectedTable";
    case Errc::AmbiguousLink: return "AmbiguousLink";
    case Errc::CycleError: return "CycleError";
    case Errc::EvalError: return "EvalError";
    case Errc::HeaderMismatch: return "HeaderMismatch";
    case Errc::IoError: return "IoError";
    case Errc::SchemaError: return "SchemaError";
    }
    return "Error";
}

std::string_view prim_name(PrimType t) {
    switch (t) {
    case PrimType::Integer: return "Integer";
    case PrimType::Float: return "Float";
    case PrimType::Text: return "Text";
    case PrimType::Boolean: return "Boolean";
    }
    return "?";
}

std::string_view kind_name(Value::Kind k) {
    switch (k) {
    case Value::Kind::Null: return "Null";
    case Value::Kind::Integer: return "Integer";
    case Value::Kind::Float: return "Float";
    case Value::Kind::Text: return "Text";
    case Value::Kind::Boolean: return "Boolean";
    case Value::Kind::Ref: return "Ref";
    }
    return "?";
}

std::string_view table_kind_name(TableKind k) {
    switch (k) {
    case TableKind::Primary: return "primary";
    case TableKind::Primitive: return "primitive";
    case TableKind::Product: return "product";
    case TableKind::Projected: return "projected";
    }
    return "?";
}

std::string_view column_kind_name(ColumnKind k) {
    switch (k) {
    case ColumnKind::Stored: return "stored";
    case ColumnKind::Calculate: return "calculate";
    case ColumnKind::Link: return "link";
    case ColumnKind::Project: return "project";
    case ColumnKind::Accumulate: return "accumulate";
    case ColumnKind::ProductAttribute: return "product-attribute";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Value

bool storage_equal(const Value& a, const Value& b) {
    if (a.kind() != b.kind())
        return false;
    switch (a.kind()) {
    case Value::Kind::Null: return true;
    case Value::Kind::Integer: return a.as_int() == b.as_int();
    case Value::Kind::Float:
        return std::bit_cast<std::uint64_t>(a.as_float()) ==
               std::bit_cast<std::uint64_t>(b.as_float());
    case Value::Kind::Text: return a.as_text() == b.as_text();
    case Value::Kind::Boolean: return a.as_bool() == b.as_bool();
    case Value::Kind::Ref: return a.as_ref() == b.as_ref();
    }
    return false;
}

std::size_t storage_hash(const Value& v) {
    std::size_t seed = static_cast<std::size_t>(v.kind()) * 0x9e3779b97f4a7c15ull;
    auto mix = [&seed](std::size_t h) {
        seed ^= h + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2);
    };
    switch (v.kind()) {
    case Value::Kind::Null: break;
    case Value::Kind::Integer: mix(std::hash<std::int64_t>{}(v.as_int())); break;
    case Value::Kind::Float:
        mix(std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(v.as_float())));
        break;
    case Value::Kind::Text: mix(std::hash<std::string>{}(v.as_text())); break;
    case Value::Kind::Boolean: mix(std::hash<bool>{}(v.as_bool())); break;
    case Value::Kind::Ref:
        mix(std::hash<const void*>{}(v.as_ref().table));
        mix(std::hash<RowId>{}(v.as_ref().row));
        break;
    }
    return seed;
}

Value adapt_for_output(const Value& value, const Table& output) {
    if (value.is_null())
        return value;
    if (auto prim = output.primitive_type()) {
        switch (*prim) {
        case PrimType::Integer:
            if (value.kind() == Value::Kind::Integer)
                return value;
            break;
        case PrimType::Float:
            if (value.kind() == Value::Kind::Float)
                return value;
            if (value.kind() == Value::Kind::Integer) // widen
                return Value(static_cast<double>(value.as_int()));
            break;
        case PrimType::Text:
            if (value.kind() == Value::Kind::Text)
                return value;
            break;
        case PrimType::Boolean:
            if (value.kind() == Value::Kind::Boolean)
                return value;
            break;
        }
        throw Error(Errc::TypeMismatch, std::string(kind_name(value.kind())) +
                                            " value does not fit output table '" + output.name() +
                                            "'");
    }
    if (value.kind() != Value::Kind::Ref || value.as_ref().table != &output)
        throw Error(Errc::TypeMismatch, std::string(kind_name(value.kind())) +
                                            " value does not reference table '" + output.name() +
                                            "'");
    return value;
}

// ---------------------------------------------------------------------------
// ColumnPath

ColumnPath::ColumnPath(std::vector<Column*> segments) : segments_(std::move(segments)) {
    if (segments_.empty())
        throw Error(Errc::UnresolvedPath, "empty column path");
    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
        if (&segments_[i]->output() != &segments_[i + 1]->input())
            throw Error(Errc::UnresolvedPath, "path segments '" + segments_[i]->name() +
                                                  "' and '" + segments_[i + 1]->name() +
                                                  "' do not compose");
    }
}

Table& ColumnPath::input() const { return segments_.front()->input(); }
Table& ColumnPath::output() const { return segments_.back()->output(); }

std::string ColumnPath::display() const {
    std::string out;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (i) out += '.';
        out += segments_[i]->name();
    }
    return out;
}

Value read_path(const ColumnPath& path, RowId row) {
    Value v = path.segments().front()->get(row);
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (v.is_null())
            return {}; // NULL short-circuit
        v = path.segments()[i]->get(v.as_ref().row);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Table

Table::Table(Schema& schema, std::string name, TableKind kind, std::uint64_t seq,
             std::optional<PrimType> prim)
    : schema_(&schema), name_(std::move(name)), kind_(kind), prim_(prim), seq_(seq) {}

std::vector<RowId> Table::rows() const {
    std::vector<RowId> out;
    out.reserve(live_);
    for (RowId r = base_; r < next_; ++r)
        if (status_[r - base_] == RowStatus::Live)
            out.push_back(r);
    return out;
}

void Table::check_readable(RowId row) const {
    if (!contains(row))
        throw Error(Errc::UnknownRow,
                    "row " + std::to_string(row) + " is not in table '" + name_ + "'");
}

RowId Table::add_row(const std::vector<std::pair<std::string, Value>>& assignments) {
    std::vector<std::pair<Column*, Value>> resolved;
    resolved.reserve(assignments.size());
    for (const auto& [name, value] : assignments) {
        Column* col = find_column(name);
        if (!col)
            throw Error(Errc::UnknownColumn, "table '" + name_ + "' has no column '" + name + "'");
        resolved.emplace_back(col, value);
    }
    return add_row_values(resolved);
}

RowId Table::add_row_values(std::span<const std::pair<Column*, Value>> assignments) {
    if (kind_ != TableKind::Primary)
        throw Error(Errc::NotPrimaryTable,
                    "rows can only be added to primary tables, not '" + name_ + "'");
    // validate everything before touching state
    std::vector<Value> adapted;
    adapted.reserve(assignments.size());
    for (const auto& [col, value] : assignments) {
        if (&col->input() != this)
            throw Error(Errc::UnknownColumn,
                        "column '" + col->name() + "' does not belong to table '" + name_ + "'");
        if (col->kind() != ColumnKind::Stored)
            throw Error(Errc::DerivedColumnWrite,
                        "column '" + col->name() + "' is derived; only stored columns take rows");
        adapted.push_back(adapt_for_output(value, col->output()));
    }
    RowId row = next_++;
    status_.push_back(RowStatus::Live);
    ++live_;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        assignments[i].first->eval_store(row, std::move(adapted[i]));
    schema_->note_table_changed(*this);
    return row;
}

void Table::remove_row(RowId row) {
    if (!is_live(row))
        throw Error(Errc::UnknownRow,
                    "row " + std::to_string(row) + " is not live in table '" + name_ + "'");
    status_[row - base_] = RowStatus::Removed;
    --live_;
    schema_->note_table_changed(*this);
}

Column* Table::find_column(std::string_view name) const {
    for (Column* c : columns_)
        if (c->name() == name)
            return c;
    return nullptr;
}

RowId Table::replace_population(std::size_t count) {
    base_ = next_;
    next_ += count;
    status_.assign(count, RowStatus::Live);
    live_ = count;
    for (Column* c : columns_)
        c->clear_data();
    return base_;
}

// ---------------------------------------------------------------------------
// Column

Column::Column(Schema& schema, std::string name, Table& input, Table& output, ColumnKind kind,
               std::uint64_t seq)
    : schema_(&schema), name_(std::move(name)), input_(&input), output_(&output), kind_(kind),
      seq_(seq) {}

Value Column::get(RowId row) const {
    input_->check_readable(row);
    std::size_t s = slot(row);
    return s < data_.size() ? data_[s] : Value{};
}

void Column::set(RowId row, const Value& value) {
    if (kind_ != ColumnKind::Stored)
        throw Error(Errc::DerivedColumnWrite,
                    "column '" + qualified_name() + "' is " +
                        std::string(column_kind_name(kind_)) + "; only stored columns accept set");
    input_->check_readable(row);
    Value v = adapt_for_output(value, *output_);
    eval_store(row, std::move(v));
    schema_->note_column_changed(*this);
}

void Column::eval_store(RowId row, Value value) {
    std::size_t s = slot(row);
    if (s >= data_.size())
        data_.resize(s + 1);
    data_[s] = std::move(value);
}

void Column::clear_data() { data_.clear(); }

std::vector<RowId> Column::deproject(const Value& value) const {
    std::vector<RowId> out;
    if (value.is_null())
        return out; // NULL matches nothing
    Value needle = adapt_for_output(value, *output_);
    for (RowId r = input_->base(); r < input_->end_ordinal(); ++r) {
        if (!input_->is_live(r))
            continue;
        std::size_t s = slot(r);
        if (s < data_.size() && storage_equal(data_[s], needle))
            out.push_back(r);
    }
    return out;
}

std::map<std::string, Value> read_object(const Table& table, RowId row) {
    table.check_readable(row);
    std::map<std::string, Value> out;
    for (Column* c : table.columns())
        out.emplace(c->name(), c->get(row));
    return out;
}

// ---------------------------------------------------------------------------
// Schema: registration and lookup

Schema::Schema() {
    const PrimType prims[] = {PrimType::Integer, PrimType::Float, PrimType::Text,
                              PrimType::Boolean};
    for (PrimType p : prims) {
        auto t = std::unique_ptr<Table>(
            new Table(*this, std::string(prim_name(p)), TableKind::Primitive, next_seq_++, p));
        primitives_[static_cast<int>(p)] = t.get();
        tables_.push_back(std::move(t));
    }
}

Schema::Schema(Schema&& other) noexcept
    : tables_(std::move(other.tables_)), columns_(std::move(other.columns_)),
      next_seq_(other.next_seq_) {
    for (int i = 0; i < 4; ++i)
        primitives_[i] = other.primitives_[i];
    for (auto& t : tables_)
        t->schema_ = this;
    for (auto& c : columns_)
        c->schema_ = this;
}

Table& Schema::create_table(std::string_view name, TableKind kind) {
    for (PrimType p : {PrimType::Integer, PrimType::Float, PrimType::Text, PrimType::Boolean})
        if (name == prim_name(p))
            throw Error(Errc::ReservedName, "'" + std::string(name) + "' is a primitive table");
    if (find_table(name))
        throw Error(Errc::DuplicateName, "table '" + std::string(name) + "' already exists");
    if (kind == TableKind::Primitive)
        throw Error(Errc::ReservedName, "primitive tables cannot be created");
    auto t = std::unique_ptr<Table>(
        new Table(*this, std::string(name), kind, next_seq_++, std::nullopt));
    Table& ref = *t;
    tables_.push_back(std::move(t));
    return ref;
}

Column& Schema::create_column(std::string_view name, Table& input, Table& output,
                              ColumnKind kind) {
    bool input_known = false, output_known = false;
    for (const auto& t : tables_) {
        input_known |= t.get() == &input;
        output_known |= t.get() == &output;
    }
    if (!input_known || !output_known)
        throw Error(Errc::UnknownTable, "column '" + std::string(name) +
                                            "' references a table outside this schema");
    if (input.kind() == TableKind::Primitive)
        throw Error(Errc::UnknownTable,
                    "primitive table '" + input.name() + "' cannot be a column input");
    if (input.find_column(name))
        throw Error(Errc::DuplicateName, "table '" + input.name() + "' already has a column '" +
                                             std::string(name) + "'");
    auto c = std::unique_ptr<Column>(
        new Column(*this, std::string(name), input, output, kind, next_seq_++));
    Column& ref = *c;
    columns_.push_back(std::move(c));
    input.columns_.push_back(&ref);
    return ref;
}

Table* Schema::find_table(std::string_view name) const {
    for (const auto& t : tables_)
        if (t->name() == name)
            return t.get();
    return nullptr;
}

Table& Schema::table(std::string_view name) const {
    Table* t = find_table(name);
    if (!t)
        throw Error(Errc::UnknownTable, "no table named '" + std::string(name) + "'");
    return *t;
}

Column& Schema::column(std::string_view table_name, std::string_view name) const {
    Column* c = table(table_name).find_column(name);
    if (!c)
        throw Error(Errc::UnknownColumn, "table '" + std::string(table_name) +
                                             "' has no column '" + std::string(name) + "'");
    return *c;
}

std::vector<Table*> Schema::tables() const {
    std::vector<Table*> out;
    out.reserve(tables_.size());
    for (const auto& t : tables_)
        out.push_back(t.get());
    return out;
}

std::vector<Column*> Schema::columns() const {
    std::vector<Column*> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_)
        out.push_back(c.get());
    return out;
}

ColumnPath Schema::resolve_path(Table& from, std::span<const std::string> segments) const {
    if (segments.empty())
        throw Error(Errc::UnresolvedPath, "empty path from table '" + from.name() + "'");
    std::vector<Column*> cols;
    Table* at = &from;
    for (const std::string& seg : segments) {
        Column* c = at->find_column(seg);
        if (!c)
            throw Error(Errc::UnresolvedPath,
                        "table '" + at->name() + "' has no column '" + seg + "'");
        cols.push_back(c);
        at = &c->output();
    }
    return ColumnPath(std::move(cols));
}

ColumnPath Schema::resolve_path(Table& from, std::string_view dotted) const {
    std::vector<std::string> segments;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        std::size_t dot = dotted.find('.', start);
        std::string_view seg =
            dot == std::string_view::npos ? dotted.substr(start) : dotted.substr(start, dot - start);
        segments.emplace_back(seg);
        if (dot == std::string_view::npos)
            break;
        start = dot + 1;
    }
    return resolve_path(from, segments);
}

// ---------------------------------------------------------------------------
// Dirty propagation

namespace {

// Fixpoint over the full dependency relation: everything downstream of
// `source` becomes dirty. The source itself is not touched.
void mark_downstream(const Schema& schema, Node source) {
    std::unordered_set<Node, NodeHash> affected{source};
    std::vector<Node> nodes;
    for (Column* c : schema.columns())
        nodes.emplace_back(c);
    for (Table* t : schema.tables())
        if (t->is_derived())
            nodes.emplace_back(t);
    bool grew = true;
    while (grew) {
        grew = false;
        for (const Node& n : nodes) {
            if (affected.contains(n))
                continue;
            for (const Node& dep : direct_dependencies(n)) {
                if (affected.contains(dep)) {
                    affected.insert(n);
                    grew = true;
                    break;
                }
            }
        }
    }
    for (const Node& n : affected)
        if (!(n == source) && is_evaluatable(n))
            set_node_dirty(n, true);
}

} // namespace

void Schema::note_table_changed(Table& table) { mark_downstream(*this, Node(&table)); }
void Schema::note_column_changed(Column& column) { mark_downstream(*this, Node(&column)); }

// ---------------------------------------------------------------------------
// Definitions

namespace {

StaticType static_type_of(const Table& t) {
    if (auto prim = t.primitive_type()) {
        switch (*prim) {
        case PrimType::Integer: return StaticType::Integer;
        case PrimType::Float: return StaticType::Float;
        case PrimType::Text: return StaticType::Text;
        case PrimType::Boolean: return StaticType::Boolean;
        }
    }
    return StaticType::Row;
}

void check_result_type(StaticType result, const Table& output, const std::string& what) {
    StaticType want = static_type_of(output);
    if (result == want)
        return;
    if (want == StaticType::Float && result == StaticType::Integer)
        return; // widens on store
    throw Error(Errc::TypeError, what + " yields " + std::string(static_type_name(result)) +
                                     " but the output table is '" + output.name() + "'");
}

// Resolves every Path node against `base`, assigning binding slots; returns
// one path per distinct spelling, in first-appearance order.
std::vector<ColumnPath> resolve_formula_paths(const Schema& schema, Table& base, Expr& expr) {
    std::vector<std::string> spellings;
    std::vector<ColumnPath> params;
    visit_paths(expr, [&](Expr& node) {
        std::string spelled = print_expr(node);
        for (std::size_t i = 0; i < spellings.size(); ++i) {
            if (spellings[i] == spelled) {
                node.slot = static_cast<int>(i);
                return;
            }
        }
        params.push_back(schema.resolve_path(base, node.path));
        spellings.push_back(std::move(spelled));
        node.slot = static_cast<int>(params.size() - 1);
    });
    return params;
}

std::function<StaticType(const Expr&)> path_typer(const std::vector<ColumnPath>& params) {
    return [&params](const Expr& node) {
        return static_type_of(params[static_cast<std::size_t>(node.slot)].output());
    };
}

} // namespace

void Schema::install_definition(Column& column, ColumnKind kind, Definition def) {
    // Redefinition drops side effects of the previous definition.
    if (column.kind_ == ColumnKind::Project && column.output_->populated_by_ == &column)
        column.output_->populated_by_ = nullptr;
    column.kind_ = kind;
    column.def_ = std::move(def);
    column.dirty_ = true;
    note_column_changed(column);
}

void Schema::define_calculate(Column& column, std::string_view formula) {
    if (!column.output().primitive_type())
        throw Error(Errc::TypeError, "calculate column '" + column.qualified_name() +
                                         "' must output a primitive type");
    ExprPtr expr = parse_expr(formula);
    if (contains_accumulator(*expr))
        throw Error(Errc::ParseError,
                    "'out' is only valid in accumulate update formulas");
    CalculateDef def;
    def.params = resolve_formula_paths(*this, column.input(), *expr);
    check_result_type(infer_type(*expr, path_typer(def.params)), column.output(),
                      "formula '" + std::string(formula) + "'");
    def.expr = std::move(expr);
    install_definition(column, ColumnKind::Calculate, std::move(def));
}

void Schema::define_calculate(Column& column, RowEvaluator evaluator,
                              std::vector<ColumnPath> params) {
    if (!column.output().primitive_type())
        throw Error(Errc::TypeError, "calculate column '" + column.qualified_name() +
                                         "' must output a primitive type");
    if (!evaluator)
        throw Error(Errc::TypeError, "calculate evaluator must be callable");
    for (const ColumnPath& p : params)
        if (&p.input() != &column.input())
            throw Error(Errc::UnresolvedPath, "parameter path '" + p.display() +
                                                  "' does not start at table '" +
                                                  column.input().name() + "'");
    CalculateDef def;
    def.native = std::move(evaluator);
    def.params = std::move(params);
    install_definition(column, ColumnKind::Calculate, std::move(def));
}

void Schema::check_key_lists(const Table& output, const std::vector<Column*>& output_keys,
                             const std::vector<ColumnPath>& input_keys) const {
    if (output_keys.empty() || input_keys.empty())
        throw Error(Errc::KeyArityMismatch, "key lists must be non-empty");
    if (output_keys.size() != input_keys.size())
        throw Error(Errc::KeyArityMismatch,
                    std::to_string(output_keys.size()) + " output keys vs " +
                        std::to_string(input_keys.size()) + " input keys");
    for (std::size_t i = 0; i < output_keys.size(); ++i) {
        if (&output_keys[i]->input() != &output)
            throw Error(Errc::TypeError, "output key '" + output_keys[i]->name() +
                                             "' is not a column of table '" + output.name() + "'");
        if (&output_keys[i]->output() != &input_keys[i].output())
            throw Error(Errc::TypeError,
                        "key " + std::to_string(i) + " types differ: '" +
                            output_keys[i]->output().name() + "' vs '" +
                            input_keys[i].output().name() + "'");
    }
}

void Schema::define_link(Column& column, std::vector<Column*> output_keys,
                         std::vector<ColumnPath> input_keys) {
    Table& target = column.output();
    if (target.kind() != TableKind::Primary && target.kind() != TableKind::Projected)
        throw Error(Errc::TypeError,
                    "link target '" + target.name() + "' must be a primary or projected table");
    check_key_lists(target, output_keys, input_keys);
    for (const ColumnPath& p : input_keys)
        if (&p.input() != &column.input())
            throw Error(Errc::UnresolvedPath, "input key path '" + p.display() +
                                                  "' does not start at table '" +
                                                  column.input().name() + "'");
    install_definition(column, ColumnKind::Link,
                       LinkDef{std::move(output_keys), std::move(input_keys)});
}

void Schema::define_accumulate(Column& column, ColumnPath group, std::string_view update,
                               Value initial) {
    ExprPtr expr = parse_expr(update);
    if (!contains_accumulator(*expr))
        throw Error(Errc::MissingAccumulator,
                    "update formula '" + std::string(update) + "' never references 'out'");
    if (group.empty() || &group.output() != &column.input())
        throw Error(Errc::GroupPathError,
                    "group path must end at table '" + column.input().name() + "'");
    AccumulateDef def;
    def.fact_params = resolve_formula_paths(*this, group.input(), *expr);
    if (!column.output().primitive_type())
        throw Error(Errc::TypeError, "accumulate column '" + column.qualified_name() +
                                         "' must output a primitive type");
    check_result_type(infer_type(*expr, path_typer(def.fact_params),
                                 static_type_of(column.output())),
                      column.output(), "update formula '" + std::string(update) + "'");
    if (initial.is_null())
        throw Error(Errc::TypeError, "accumulate initial value must be non-NULL");
    def.initial = adapt_for_output(initial, column.output());
    def.group = std::move(group);
    def.update = std::move(expr);
    install_definition(column, ColumnKind::Accumulate, std::move(def));
}

void Schema::define_accumulate(Column& column, ColumnPath group, RowEvaluator evaluator,
                               std::vector<ColumnPath> fact_params, Value initial) {
    if (!column.output().primitive_type())
        throw Error(Errc::TypeError, "accumulate column '" + column.qualified_name() +
                                         "' must output a primitive type");
    if (!evaluator)
        throw Error(Errc::MissingAccumulator, "accumulate evaluator must be callable");
    if (group.empty() || &group.output() != &column.input())
        throw Error(Errc::GroupPathError,
                    "group path must end at table '" + column.input().name() + "'");
    for (const ColumnPath& p : fact_params)
        if (&p.input() != &group.input())
            throw Error(Errc::UnresolvedPath, "fact path '" + p.display() +
                                                  "' does not start at the fact table '" +
                                                  group.input().name() + "'");
    if (initial.is_null())
        throw Error(Errc::TypeError, "accumulate initial value must be non-NULL");
    AccumulateDef def;
    def.native = std::move(evaluator);
    def.fact_params = std::move(fact_params);
    def.initial = adapt_for_output(initial, column.output());
    def.group = std::move(group);
    install_definition(column, ColumnKind::Accumulate, std::move(def));
}

void Schema::define_product(Table& table, std::vector<Column*> dimensions,
                            std::optional<std::string> predicate) {
    if (table.kind() != TableKind::Product)
        throw Error(Errc::TypeError, "table '" + table.name() + "' is not a product table");
    if (dimensions.empty())
        throw Error(Errc::NoDimensions, "product table '" + table.name() + "' needs dimensions");
    for (Column* d : dimensions) {
        if (&d->input() != &table)
            throw Error(Errc::TypeError, "dimension '" + d->name() +
                                             "' is not a column of table '" + table.name() + "'");
        if (d->output().kind() == TableKind::Primitive)
            throw Error(Errc::TypeError,
                        "dimension '" + d->name() + "' cannot range over a primitive table");
    }
    ProductDef def;
    if (predicate) {
        ExprPtr expr = parse_expr(*predicate);
        if (contains_accumulator(*expr))
            throw Error(Errc::ParseError, "'out' is only valid in accumulate update formulas");
        // Predicate paths start at a dimension; the head is bound to the
        // candidate source row, the tail is read from there.
        std::vector<std::string> spellings;
        std::vector<StaticType> slot_types;
        visit_paths(*expr, [&](Expr& node) {
            std::string spelled = print_expr(node);
            for (std::size_t i = 0; i < spellings.size(); ++i) {
                if (spellings[i] == spelled) {
                    node.slot = static_cast<int>(i);
                    return;
                }
            }
            auto dim = std::find_if(dimensions.begin(), dimensions.end(), [&](Column* d) {
                return d->name() == node.path.front();
            });
            if (dim == dimensions.end())
                throw Error(Errc::UnresolvedPath,
                            "predicate path '" + spelled + "' must start at a dimension of '" +
                                table.name() + "'");
            ProductDef::PredParam param;
            param.dimension = static_cast<std::size_t>(dim - dimensions.begin());
            if (node.path.size() > 1) {
                std::vector<std::string> tail(node.path.begin() + 1, node.path.end());
                param.tail = resolve_path((*dim)->output(), tail);
                slot_types.push_back(static_type_of(param.tail.output()));
            } else {
                slot_types.push_back(StaticType::Row);
            }
            def.predicate_params.push_back(std::move(param));
            spellings.push_back(std::move(spelled));
            node.slot = static_cast<int>(def.predicate_params.size() - 1);
        });
        StaticType t = infer_type(*expr, [&](const Expr& node) {
            return slot_types[static_cast<std::size_t>(node.slot)];
        });
        if (t != StaticType::Boolean)
            throw Error(Errc::TypeError, "product predicate must be Boolean, got " +
                                             std::string(static_type_name(t)));
        def.predicate = std::move(expr);
    }
    for (Column* d : dimensions) {
        d->kind_ = ColumnKind::ProductAttribute;
        d->dirty_ = true;
    }
    def.dimensions = std::move(dimensions);
    table.def_ = std::move(def);
    table.dirty_ = true;
    note_table_changed(table);
}

void Schema::define_project(Column& column, std::vector<Column*> output_keys,
                            std::vector<ColumnPath> input_keys) {
    Table& target = column.output();
    if (target.kind() != TableKind::Projected)
        throw Error(Errc::NotProjectedTable,
                    "project target '" + target.name() + "' is not a projected table");
    if (target.populated_by_ && target.populated_by_ != &column)
        throw Error(Errc::DuplicateName, "table '" + target.name() +
                                             "' is already populated by project column '" +
                                             target.populated_by_->qualified_name() + "'");
    check_key_lists(target, output_keys, input_keys);
    for (Column* k : output_keys)
        if (k->kind() != ColumnKind::Stored)
            throw Error(Errc::TypeError,
                        "project output key '" + k->name() + "' must be a stored column");
    for (const ColumnPath& p : input_keys)
        if (&p.input() != &column.input())
            throw Error(Errc::UnresolvedPath, "input key path '" + p.display() +
                                                  "' does not start at table '" +
                                                  column.input().name() + "'");
    install_definition(column, ColumnKind::Project,
                       ProjectDef{std::move(output_keys), std::move(input_keys)});
    target.populated_by_ = &column;
    target.dirty_ = true;
    note_table_changed(target);
}

} // namespace funcol
