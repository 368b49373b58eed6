//! Loader for the API-model file format: a versioned TOML document listing
//! module types, named types with properties and signatures, and builtin
//! property tables. Function-typed properties may be written inline as
//! `fn(T, ...) -> R`; the loader expands them into synthesized named types
//! carrying the call signature.

use super::{ApiModel, BuiltinType, CallSignature, ModelError, TypeDef, TypeRef};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Deserialize)]
struct FileModel {
    version: u32,
    #[serde(default)]
    modules: BTreeMap<String, String>,
    #[serde(default)]
    types: BTreeMap<String, FileTypeDef>,
    #[serde(default)]
    builtins: BTreeMap<String, FileTypeDef>,
}

#[derive(Debug, Deserialize)]
struct FileTypeDef {
    #[serde(default)]
    props: BTreeMap<String, String>,
    #[serde(default)]
    call: Option<FileCall>,
    #[serde(default)]
    construct: Option<String>,
}

#[derive(Debug, Deserialize)]
struct FileCall {
    #[serde(default)]
    params: Vec<String>,
    ret: String,
}

pub fn load_model(path: &Path) -> Result<ApiModel, ModelError> {
    let text = std::fs::read_to_string(path)?;
    load_model_str(&text)
}

pub fn load_model_str(text: &str) -> Result<ApiModel, ModelError> {
    let file: FileModel = toml::from_str(text).map_err(|e| ModelError::Toml(e.to_string()))?;
    if file.version != 1 {
        return Err(ModelError::Toml(format!(
            "unsupported model version {}",
            file.version
        )));
    }
    let mut synth: BTreeMap<String, TypeDef> = BTreeMap::new();

    let mut model = ApiModel::default();
    for (module, type_text) in &file.modules {
        let t = parse_type_expr(type_text, &format!("modules.{module}"), &mut synth)?;
        model.modules.insert(module.clone(), t);
    }
    for (name, def) in &file.types {
        let def = lower_def(def, &format!("types.{name}"), &mut synth)?;
        model.types.insert(name.clone(), def);
    }
    for (name, def) in &file.builtins {
        let Some(builtin) = BuiltinType::from_name(name) else {
            return Err(ModelError::Toml(format!("unknown builtin `{name}`")));
        };
        let def = lower_def(def, &format!("builtins.{name}"), &mut synth)?;
        model.builtins.insert(builtin, def);
    }
    for b in BuiltinType::ALL {
        model.builtins.entry(b).or_default();
    }
    for (name, def) in synth {
        model.types.insert(name, def);
    }
    model.validate()?;
    Ok(model)
}

fn lower_def(
    def: &FileTypeDef,
    ctx: &str,
    synth: &mut BTreeMap<String, TypeDef>,
) -> Result<TypeDef, ModelError> {
    let mut out = TypeDef::default();
    for (prop, type_text) in &def.props {
        let t = parse_type_expr(type_text, &format!("{ctx}.props.{prop}"), synth)?;
        out.props.insert(prop.clone(), t);
    }
    if let Some(call) = &def.call {
        let mut params = Vec::new();
        for (i, p) in call.params.iter().enumerate() {
            params.push(parse_type_expr(p, &format!("{ctx}.call[{i}]"), synth)?);
        }
        let ret = parse_type_expr(&call.ret, &format!("{ctx}.call.ret"), synth)?;
        out.call = Some(CallSignature { params, ret });
    }
    if let Some(c) = &def.construct {
        out.construct = Some(parse_type_expr(c, &format!("{ctx}.construct"), synth)?);
    }
    Ok(out)
}

fn parse_type_expr(
    text: &str,
    ctx: &str,
    synth: &mut BTreeMap<String, TypeDef>,
) -> Result<TypeRef, ModelError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ModelError::BadTypeExpr {
            context: ctx.to_string(),
            message: "empty type expression".to_string(),
        });
    }
    match text {
        "any" => return Ok(TypeRef::Any),
        "var" => return Ok(TypeRef::TypeVar),
        _ => {}
    }
    if let Some(b) = BuiltinType::from_name(text) {
        return Ok(TypeRef::Builtin(b));
    }
    if let Some(rest) = text.strip_prefix("fn") {
        let rest = rest.trim_start();
        if let Some(args) = rest.strip_prefix('(') {
            return parse_fn_expr(args, ctx, synth);
        }
    }
    Ok(TypeRef::Named(text.to_string()))
}

/// Parses `ARGS ) -> RET` where commas split arguments at depth zero.
fn parse_fn_expr(
    after_open: &str,
    ctx: &str,
    synth: &mut BTreeMap<String, TypeDef>,
) -> Result<TypeRef, ModelError> {
    let bad = |message: &str| ModelError::BadTypeExpr {
        context: ctx.to_string(),
        message: message.to_string(),
    };
    let mut depth = 0usize;
    let mut close = None;
    for (i, c) in after_open.char_indices() {
        match c {
            '(' => depth += 1,
            ')' if depth == 0 => {
                close = Some(i);
                break;
            }
            ')' => depth -= 1,
            _ => {}
        }
    }
    let close = close.ok_or_else(|| bad("unterminated `fn(`"))?;
    let args_text = &after_open[..close];
    let rest = after_open[close + 1..].trim_start();
    let ret_text = rest
        .strip_prefix("->")
        .ok_or_else(|| bad("expected `->` after parameter list"))?
        .trim();

    let mut params = Vec::new();
    if !args_text.trim().is_empty() {
        let mut depth = 0usize;
        let mut start = 0usize;
        let mut pieces = Vec::new();
        for (i, c) in args_text.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth = depth.saturating_sub(1),
                ',' if depth == 0 => {
                    pieces.push(&args_text[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        pieces.push(&args_text[start..]);
        for (i, piece) in pieces.iter().enumerate() {
            params.push(parse_type_expr(piece, &format!("{ctx}[{i}]"), synth)?);
        }
    }
    let ret = parse_type_expr(ret_text, &format!("{ctx}.ret"), synth)?;

    let name = format!("{ctx}#fn");
    synth.insert(name.clone(), TypeDef {
        props: BTreeMap::new(),
        call: Some(CallSignature { params, ret }),
        construct: None,
    });
    Ok(TypeRef::Named(name))
}
