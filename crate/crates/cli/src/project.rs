use rsp_core::cone::{cone_lift_residual, project_cone_lift, ConeLiftSpec, LiftedVar};
use rsp_core::sets::{project_intersection, SetDescriptor};
use rsp_core::{Result, RspError};

use crate::{ProjectArgs, EXIT_OK};

fn parse_vec(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| RspError::Parse(format!("{t:?} is not a number"))))
        .collect()
}

/// `l2:R`, `l1:R`, `linf:R`, `box:LO/HI` or a JSON descriptor.
pub fn parse_set(s: &str) -> Result<SetDescriptor<f64>> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| RspError::Parse(e.to_string()));
    }
    let (kind, rest) = s.split_once(':').ok_or_else(|| RspError::Parse(format!("set {s:?} has no ':'")))?;
    let radius = || rest.trim().parse::<f64>().map_err(|_| RspError::Parse(format!("bad radius {rest:?}")));
    match kind {
        "l2" => Ok(SetDescriptor::l2(radius()?)),
        "l1" => Ok(SetDescriptor::l1(radius()?)),
        "linf" => Ok(SetDescriptor::linf(radius()?)),
        "box" => {
            let (lo, hi) = rest.split_once('/').ok_or_else(|| RspError::Parse("box needs LO/HI".into()))?;
            Ok(SetDescriptor::boxed(parse_vec(lo)?, parse_vec(hi)?))
        }
        other => Err(RspError::UnsupportedSet(format!("set kind {other:?}"))),
    }
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.12}")).collect();
    format!("({})", parts.join(", "))
}

pub fn cmd_project(a: &ProjectArgs) -> Result<i32> {
    let set = parse_set(&a.set)?;
    let z = parse_vec(&a.point)?;
    set.validate(z.len())?;
    if !(a.lambda_cap >= 0.0) {
        return Err(RspError::InvalidSet("lambda cap must be nonnegative".into()));
    }
    let pz = if set.is_intersection() { project_intersection(&set, &z, 1e-12, 10_000)? } else { set.project(&z)? };
    let spec = ConeLiftSpec::capped(set, a.lambda_cap);
    let u = LiftedVar::new(z, a.lambda);
    let p = project_cone_lift(&spec, &u, 1e-14)?;
    let kkt = cone_lift_residual(&spec, &u, &p)?;
    println!("P_Z = {}", fmt(&pz));
    println!("P_U = ({}, {:.12})", fmt(&p.z_tilde), p.lambda);
    println!("mu* = {:.12}", p.lambda);
    println!("kkt = {kkt:.3e}");
    Ok(EXIT_OK)
}
