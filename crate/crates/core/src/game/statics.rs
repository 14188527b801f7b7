use serde::{Deserialize, Serialize};

use super::params::{check_restrictions, RestrictionReport};
use super::profile::construct_clientelism_equilibrium;
use super::{qser, GameError, GameParams, Rational};
use crate::exec::Execution;

/// Values to sweep; an omitted axis keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub b: Vec<f64>,
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default)]
    pub c: Vec<f64>,
    #[serde(default, rename = "R")]
    pub r: Vec<f64>,
    #[serde(default)]
    pub e: Vec<f64>,
}

impl GridSpec {
    /// Cartesian product of the axes, sorted by `(n, b, theta, c, R, e)`.
    pub fn points(&self, base: &GameParams) -> Result<Vec<GameParams>, GameError> {
        use super::params::rational_from_f64 as exact;
        fn axis<T: Clone>(
            values: &[f64],
            name: &'static str,
            base: &T,
            conv: impl Fn(&'static str, f64) -> Result<T, GameError>,
        ) -> Result<Vec<T>, GameError> {
            if values.is_empty() {
                Ok(vec![base.clone()])
            } else {
                values.iter().map(|&v| conv(name, v)).collect()
            }
        }
        let ns = if self.n.is_empty() {
            vec![base.n]
        } else {
            self.n.clone()
        };
        let bs = axis(&self.b, "b", &base.b, exact)?;
        let thetas = axis(&self.theta, "theta", &base.theta, exact)?;
        let cs = axis(&self.c, "c", &base.c, exact)?;
        let rs = axis(&self.r, "R", &base.r, exact)?;
        let es = axis(&self.e, "e", &base.e, exact)?;
        let mut points = Vec::new();
        for &n in &ns {
            for b in &bs {
                for theta in &thetas {
                    for c in &cs {
                        for r in &rs {
                            for e in &es {
                                points.push(GameParams::exact(n, *b, *theta, *c, *r, *e)?);
                            }
                        }
                    }
                }
            }
        }
        points.sort_by(|x, y| {
            (x.n, x.b, x.theta, x.c, x.r, x.e).cmp(&(y.n, y.b, y.theta, y.c, y.r, y.e))
        });
        points.dedup();
        Ok(points)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StaticsRow {
    pub params: GameParams,
    pub restrictions: RestrictionReport,
    /// False when a restriction fails; such rows carry no counts.
    pub included: bool,
    pub clients: Option<usize>,
    #[serde(with = "qser::opt")]
    pub client_work: Option<Rational>,
    #[serde(with = "qser::opt")]
    pub nonclient_work: Option<Rational>,
    /// Client minus non-client expected public work.
    #[serde(with = "qser::opt")]
    pub work_gap: Option<Rational>,
}

/// Equilibrium client count and work gap at every grid point.
pub fn comparative_statics(
    base: &GameParams,
    grid: &GridSpec,
    exec: Execution,
) -> Result<Vec<StaticsRow>, GameError> {
    let points = grid.points(base)?;
    Ok(exec.map(&points, |p| {
        let restrictions = check_restrictions(p);
        let mut row = StaticsRow {
            params: p.clone(),
            restrictions,
            included: false,
            clients: None,
            client_work: None,
            nonclient_work: None,
            work_gap: None,
        };
        if let Ok(eq) = construct_clientelism_equilibrium(p) {
            let client = eq.outcome.min_client_work();
            let nonclient = eq.outcome.max_nonclient_work();
            row.included = true;
            row.clients = Some(eq.outcome.client_count());
            row.client_work = client;
            row.nonclient_work = nonclient;
            row.work_gap = client.zip(nonclient).map(|(c, n)| c - n);
        }
        row
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clients_fall_with_b() {
        let grid = GridSpec {
            b: vec![5.0, 3.0, 4.0],
            ..Default::default()
        };
        let rows = comparative_statics(&GameParams::reference(), &grid, Execution::Sequential).unwrap();
        let counts: Vec<_> = rows.iter().map(|r| r.clients).collect();
        assert_eq!(counts, [Some(6), Some(5), Some(3)]);
        assert_eq!(rows[0].work_gap, Some(Rational::new(126, 100)));
    }

    #[test]
    fn failing_point_is_excluded() {
        let grid = GridSpec {
            b: vec![2.5, 3.0],
            ..Default::default()
        };
        let rows = comparative_statics(&GameParams::reference(), &grid, Execution::Sequential).unwrap();
        assert!(!rows[0].included && rows[0].clients.is_none());
        assert!(!rows[0].restrictions.a1.pass);
        assert!(rows[1].included);
    }

    #[test]
    fn grid_json() {
        let g: GridSpec = serde_json::from_str(r#"{"b":[3,4],"theta":[0.6,0.7]}"#).unwrap();
        assert_eq!(g.points(&GameParams::reference()).unwrap().len(), 4);
        assert!(serde_json::from_str::<GridSpec>(r#"{"beta":[1]}"#).is_err());
    }
}
