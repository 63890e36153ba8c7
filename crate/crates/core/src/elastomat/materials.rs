use super::ElastomatError;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// One row of the material characterisation table. Missing cells are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialRecord {
    pub name: String,
    pub compression_set_pct: Option<f64>,
    pub linearity_r2: f64,
    /// As tabulated, N/mm.
    pub linear_stiffness_n_per_mm: f64,
    pub preloaded_modulus_n_per_mm2: Option<f64>,
    pub damping_ns_per_m: f64,
    pub creep_pct: Option<f64>,
    pub cost_usd: Option<f64>,
    pub diameter_mm: f64,
    pub thickness_mm: f64,
}

impl MaterialRecord {
    pub fn validate(&self) -> Result<(), ElastomatError> {
        let pct_ok = |v: Option<f64>| v.is_none_or(|p| (0.0..=100.0).contains(&p));
        if !pct_ok(self.compression_set_pct)
            || !pct_ok(self.creep_pct)
            || !(0.0..=1.0).contains(&self.linearity_r2)
            || !(self.linear_stiffness_n_per_mm >= 0.0)
            || !(self.damping_ns_per_m >= 0.0)
            || self.cost_usd.is_some_and(|c| !(c >= 0.0))
        {
            return Err(ElastomatError::InvalidInput(format!("record `{}` is out of range", self.name)));
        }
        Ok(())
    }

    fn criterion(&self, c: Criterion) -> Option<f64> {
        match c {
            Criterion::Linearity => Some(self.linearity_r2),
            Criterion::CompressionSet => self.compression_set_pct,
            Criterion::Creep => self.creep_pct,
            Criterion::Damping => Some(self.damping_ns_per_m),
            Criterion::Cost => self.cost_usd,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn rec(
    name: &str,
    cs: Option<f64>,
    r2: f64,
    k: f64,
    e: Option<f64>,
    b: f64,
    creep: Option<f64>,
    cost: Option<f64>,
) -> MaterialRecord {
    MaterialRecord {
        name: name.to_string(),
        compression_set_pct: cs,
        linearity_r2: r2,
        linear_stiffness_n_per_mm: k,
        preloaded_modulus_n_per_mm2: e,
        damping_ns_per_m: b,
        creep_pct: creep,
        cost_usd: cost,
        diameter_mm: 46.0,
        thickness_mm: 27.0,
    }
}

/// The eight characterised springs.
pub fn builtin_materials() -> Vec<MaterialRecord> {
    vec![
        rec("Spring steel", Some(0.0), 0.996, 860.8, None, 0.0, Some(0.0), None),
        rec("Polyurethane 90A", Some(2.0), 0.992, 8109.0, Some(112.5), 16000.0, Some(15.3), Some(19.40)),
        rec("Reinforced silicone 70A", Some(2.7), 0.978, 57570.0, Some(798.7), 242000.0, None, Some(29.08)),
        rec("Buna-N 90A", Some(2.8), 0.975, 11270.0, Some(156.4), 29000.0, Some(25.0), Some(51.47)),
        rec("Viton 75A", Some(4.0), 0.963, 2430.0, Some(33.7), 9000.0, Some(30.14), Some(105.62)),
        rec("Polyurethane 80A", Some(4.5), 0.993, 2266.0, Some(31.4), 4000.0, Some(16.8), Some(19.40)),
        rec("EPDM 80A", Some(6.48), 0.939, 6499.0, Some(90.2), 16000.0, Some(23.4), Some(35.28)),
        rec("Silicone 90A", None, 0.983, 12460.0, Some(172.9), 37000.0, Some(10.7), Some(29.41)),
    ]
}

pub fn write_materials_csv<W: Write>(w: W, records: &[MaterialRecord]) -> Result<(), ElastomatError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_materials_csv<R: Read>(r: R) -> Result<Vec<MaterialRecord>, ElastomatError> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rd.deserialize() {
        let rec: MaterialRecord = row?;
        rec.validate()?;
        out.push(rec);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Linearity,
    CompressionSet,
    Creep,
    Damping,
    Cost,
}

impl Criterion {
    pub const ALL: [Criterion; 5] =
        [Self::Linearity, Self::CompressionSet, Self::Creep, Self::Damping, Self::Cost];

    fn higher_is_better(self) -> bool {
        matches!(self, Self::Linearity | Self::Damping)
    }
}

/// Non-negative criterion weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankWeights {
    pub linearity: f64,
    pub compression_set: f64,
    pub creep: f64,
    pub damping: f64,
    pub cost: f64,
}

impl Default for RankWeights {
    fn default() -> Self {
        Self { linearity: 1.0, compression_set: 1.0, creep: 1.0, damping: 1.0, cost: 1.0 }
    }
}

impl RankWeights {
    fn get(&self, c: Criterion) -> f64 {
        match c {
            Criterion::Linearity => self.linearity,
            Criterion::CompressionSet => self.compression_set,
            Criterion::Creep => self.creep,
            Criterion::Damping => self.damping,
            Criterion::Cost => self.cost,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RankOptions {
    /// With a positive damping weight, materials below this damping are excluded.
    pub min_damping_ns_per_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    /// Best first.
    pub ranked: Vec<(String, f64)>,
    /// Excluded materials with the reason.
    pub excluded: Vec<(String, String)>,
}

/// Weighted min-max score over the criteria, best first; ties go to the
/// lexicographically smaller name.
pub fn rank_materials(
    records: &[MaterialRecord],
    weights: &RankWeights,
    options: &RankOptions,
) -> Result<Ranking, ElastomatError> {
    if records.is_empty() {
        return Err(ElastomatError::InvalidInput("no materials to rank".into()));
    }
    if Criterion::ALL.iter().any(|c| !(weights.get(*c) >= 0.0) || !weights.get(*c).is_finite()) {
        return Err(ElastomatError::InvalidInput("weights must be finite and non-negative".into()));
    }
    let active: Vec<Criterion> = Criterion::ALL.into_iter().filter(|c| weights.get(*c) > 0.0).collect();
    let mut excluded = Vec::new();
    let mut kept = Vec::new();
    for r in records {
        if let Some(c) = active.iter().find(|c| r.criterion(**c).is_none()) {
            excluded.push((r.name.clone(), format!("missing {c:?}")));
        } else if let (true, Some(min)) = (weights.damping > 0.0, options.min_damping_ns_per_m) {
            if r.damping_ns_per_m < min {
                excluded.push((r.name.clone(), format!("damping below {min}")));
            } else {
                kept.push(r);
            }
        } else {
            kept.push(r);
        }
    }
    if kept.is_empty() {
        return Err(ElastomatError::AllExcluded);
    }
    let total_w: f64 = active.iter().map(|c| weights.get(*c)).sum();
    let mut scores = vec![0.0; kept.len()];
    for &c in &active {
        let vals: Vec<f64> = kept.iter().map(|r| r.criterion(c).unwrap()).collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (s, v) in scores.iter_mut().zip(&vals) {
            let norm = if hi > lo {
                let u = (v - lo) / (hi - lo);
                if c.higher_is_better() { u } else { 1.0 - u }
            } else {
                1.0
            };
            *s += weights.get(c) * norm;
        }
    }
    let mut ranked: Vec<(String, f64)> = kept
        .iter()
        .zip(scores)
        .map(|(r, s)| (r.name.clone(), if total_w > 0.0 { s / total_w } else { 1.0 }))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(Ranking { ranked, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn find<'a>(v: &'a [MaterialRecord], n: &str) -> &'a MaterialRecord {
        v.iter().find(|r| r.name == n).unwrap()
    }

    #[test]
    fn table_contents() {
        let m = builtin_materials();
        assert_eq!(m.len(), 8);
        let pu = find(&m, "Polyurethane 90A");
        assert_eq!(pu.linear_stiffness_n_per_mm, 8109.0);
        assert_eq!(pu.damping_ns_per_m, 16000.0);
        assert_eq!(pu.creep_pct, Some(15.3));
        assert_eq!(pu.compression_set_pct, Some(2.0));
        let steel = find(&m, "Spring steel");
        assert_eq!(steel.damping_ns_per_m, 0.0);
        assert_eq!(steel.compression_set_pct, Some(0.0));
        assert_eq!(steel.cost_usd, None);
        assert_eq!(find(&m, "Reinforced silicone 70A").creep_pct, None);
        assert_eq!(find(&m, "Silicone 90A").compression_set_pct, None);
        assert!(m.iter().all(|r| r.validate().is_ok() && r.diameter_mm == 46.0 && r.thickness_mm == 27.0));
    }

    #[test]
    fn equal_weights_pick_polyurethane_90a() {
        let elastomers: Vec<_> = builtin_materials().into_iter().filter(|r| r.name != "Spring steel").collect();
        let r = rank_materials(&elastomers, &RankWeights::default(), &RankOptions::default()).unwrap();
        assert_eq!(r.ranked[0].0, "Polyurethane 90A");
        let ex: Vec<_> = r.excluded.iter().map(|e| e.0.as_str()).collect();
        assert_eq!(ex, ["Reinforced silicone 70A", "Silicone 90A"]);
    }

    #[test]
    fn cost_only_tie_is_lexicographic() {
        let w = RankWeights { linearity: 0.0, compression_set: 0.0, creep: 0.0, damping: 0.0, cost: 1.0 };
        let r = rank_materials(&builtin_materials(), &w, &RankOptions::default()).unwrap();
        assert_eq!(r.ranked[0].0, "Polyurethane 80A");
        assert_eq!(r.ranked[1].0, "Polyurethane 90A");
        assert_eq!(r.ranked[0].1, r.ranked[1].1);
    }

    #[test]
    fn single_record_scores_one() {
        let m = builtin_materials();
        let r = rank_materials(&m[1..2], &RankWeights::default(), &RankOptions::default()).unwrap();
        assert_eq!(r.ranked, vec![("Polyurethane 90A".to_string(), 1.0)]);
    }

    #[test]
    fn damping_threshold_drops_steel() {
        let w = RankWeights { cost: 0.0, ..Default::default() };
        let o = RankOptions { min_damping_ns_per_m: Some(1.0) };
        let r = rank_materials(&builtin_materials(), &w, &o).unwrap();
        assert!(r.excluded.iter().any(|e| e.0 == "Spring steel"));
        let none = RankOptions { min_damping_ns_per_m: Some(1e9) };
        assert!(matches!(rank_materials(&builtin_materials(), &w, &none), Err(ElastomatError::AllExcluded)));
    }

    #[test]
    fn csv_round_trip_keeps_absent_cells() {
        let m = builtin_materials();
        let mut buf = Vec::new();
        write_materials_csv(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().starts_with("name,compression_set_pct,linearity_r2"));
        assert_eq!(read_materials_csv(&buf[..]).unwrap(), m);
    }
}
