use std::path::PathBuf;

use clap::Args;
use cmfield::constants::{Constant, PrecisionLadder};
use cmfield::exact::parse::parse_poly;
use cmfield::exact::parse_rational;
use cmfield::field::{validate_pair_with_offset, ConjugatePair, FieldDefinition, FieldError, Preset};

use crate::Fail;

/// Where the conjugate pair comes from.
#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Preset: zeta3, zeta2, ln2 or e.
    pub preset: Option<String>,
    /// JSON field-definition file.
    #[arg(long, conflicts_with = "preset")]
    pub file: Option<PathBuf>,
    /// f(x, y) as an expression.
    #[arg(long, conflicts_with_all = ["preset", "file"], requires = "fbar")]
    pub f: Option<String>,
    /// fbar(x, y) as an expression.
    #[arg(long, requires = "f")]
    pub fbar: Option<String>,
    /// Constant moved from b_y to b_x in the split of f * fbar.
    #[arg(long)]
    pub offset: Option<String>,
}

pub struct Loaded {
    pub definition: FieldDefinition,
    pub pair: ConjugatePair,
    pub preset: Option<Preset>,
}

pub fn field_error(e: FieldError) -> Fail {
    match e {
        FieldError::Parse(_) | FieldError::UnknownPreset(_) | FieldError::BadRational(_) => Fail::Usage(e.to_string()),
        other => Fail::Math(other.to_string()),
    }
}

fn parse_named(name: &str, text: &str) -> Result<cmfield::exact::BiPoly, Fail> {
    parse_poly(text).map_err(|e| Fail::Usage(format!("{name}: {e}")))
}

/// Reads the definition without validating it.
pub fn definition(args: &FieldArgs) -> Result<(FieldDefinition, Option<Preset>), Fail> {
    if let Some(name) = &args.preset {
        let preset = Preset::parse(name).map_err(field_error)?;
        let mut def = preset.definition();
        if args.offset.is_some() {
            def.split_offset = args.offset.clone();
        }
        return Ok((def, Some(preset)));
    }
    if let Some(path) = &args.file {
        let text = std::fs::read_to_string(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
        let mut def: FieldDefinition =
            serde_json::from_str(&text).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
        if args.offset.is_some() {
            def.split_offset = args.offset.clone();
        }
        return Ok((def, None));
    }
    match (&args.f, &args.fbar) {
        (Some(f), Some(fbar)) => Ok((
            FieldDefinition { f: f.clone(), fbar: fbar.clone(), split_offset: args.offset.clone(), origin: None },
            None,
        )),
        _ => Err(Fail::Usage("give a preset, --file, or both --f and --fbar".into())),
    }
}

pub fn load(args: &FieldArgs) -> Result<Loaded, Fail> {
    let (definition, preset) = definition(args)?;
    let f = parse_named("f", &definition.f)?;
    let fbar = parse_named("fbar", &definition.fbar)?;
    let offset = match &definition.split_offset {
        None => num_traits::Zero::zero(),
        Some(s) => parse_rational(s).ok_or_else(|| Fail::Usage(format!("split_offset: not a rational number: '{s}'")))?,
    };
    let mut pair = validate_pair_with_offset(&f, &fbar, &offset).map_err(field_error)?;
    if let Some([a, b]) = definition.origin {
        pair = pair.translate(a, b).map_err(field_error)?;
    }
    Ok(Loaded { definition, pair, preset })
}

/// Constant from `--const`, falling back to the preset's target.
pub fn ladder(text: Option<&str>, preset: Option<Preset>) -> Result<PrecisionLadder, Fail> {
    let constant: Constant = match (text, preset) {
        (Some(t), _) => t.parse().map_err(|e: cmfield::constants::ConstantError| Fail::Usage(e.to_string()))?,
        (None, Some(p)) => p.constant(),
        (None, None) => return Err(Fail::Usage("--const is required for a field that is not a preset".into())),
    };
    Ok(PrecisionLadder::new(constant))
}
