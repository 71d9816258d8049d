//! Interference topologies: random network generators, the received-power
//! neighbor rule and the plain-text edge-list format.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use thiserror::Error;

/// Header tag of the edge-list format.
pub const EDGE_LIST_MAGIC: &str = "spinalloc-graph v1";

/// Stations closer than this (km) are treated as being this far apart.
pub const MIN_DISTANCE_KM: f64 = 1e-3;

/// Slack (dB) applied to the `>=` threshold comparison so that a received
/// power that is mathematically on the threshold is not lost to rounding.
pub const THRESHOLD_SLACK_DB: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("station index {index} out of range for {n} stations")]
    StationOutOfRange { index: usize, n: usize },
    #[error("self-loop on station {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge gain must be finite and positive, got {0}")]
    BadGain(f64),
    #[error("received power needs positive gain and transmit power (gain={gain}, p_tx={p_tx})")]
    Domain { gain: f64, p_tx: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Radio parameters of the geometric network model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Transmit power in mW.
    pub p_tx: f64,
    /// Noise power (linear). Kept for reference only; the neighbor test uses
    /// signal power alone.
    pub sigma2: f64,
    /// Neighbor threshold in dBm.
    pub mu_dbm: f64,
    pub path_loss_exp: f64,
    /// Side of the square deployment area in km.
    pub area_km: f64,
    /// Large-scale path gain in dB at the 1 km reference distance.
    pub ref_gain_db: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            p_tx: 100.0,
            sigma2: 1.0,
            mu_dbm: -75.0,
            path_loss_exp: 3.0,
            area_km: 1.0,
            ref_gain_db: -124.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<(), NetError> {
        if !(self.p_tx > 0.0) {
            return Err(NetError::InvalidParam(format!("p_tx must be > 0, got {}", self.p_tx)));
        }
        if !(self.path_loss_exp > 0.0) {
            return Err(NetError::InvalidParam(format!(
                "path_loss_exp must be > 0, got {}",
                self.path_loss_exp
            )));
        }
        if !(self.area_km > 0.0) {
            return Err(NetError::InvalidParam(format!("area_km must be > 0, got {}", self.area_km)));
        }
        if !self.ref_gain_db.is_finite() || !self.mu_dbm.is_finite() {
            return Err(NetError::InvalidParam("ref_gain_db and mu_dbm must be finite".into()));
        }
        Ok(())
    }

    /// Linear channel gain `|h|^2` for small-scale fading `fading` at distance `d_km`.
    pub fn channel_gain(&self, fading: f64, d_km: f64) -> f64 {
        let d = d_km.max(MIN_DISTANCE_KM);
        fading * 10f64.powf(self.ref_gain_db / 10.0) * d.powf(-self.path_loss_exp)
    }
}

/// Received power `10 log10(gain * p_tx)` in dBm.
pub fn received_power_dbm(gain: f64, p_tx: f64) -> Result<f64, NetError> {
    if !(gain > 0.0) || !(p_tx > 0.0) {
        return Err(NetError::Domain { gain, p_tx });
    }
    Ok(10.0 * (gain * p_tx).log10())
}

/// The neighbor rule: received power at or above the threshold.
pub fn is_neighbor(gain: f64, p_tx: f64, mu_dbm: f64) -> bool {
    received_power_dbm(gain, p_tx).is_ok_and(|p| p >= mu_dbm - THRESHOLD_SLACK_DB)
}

/// Undirected interference graph. Edge keys are stored as `(min, max)`, so
/// lookups are symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    n: usize,
    gains: BTreeMap<(usize, usize), f64>,
    positions: Option<Vec<(f64, f64)>>,
    adj: Vec<Vec<usize>>,
}

fn key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl NetworkGraph {
    /// Graph with `n` stations and no edges.
    pub fn new(n: usize) -> Self {
        Self { n, gains: BTreeMap::new(), positions: None, adj: vec![Vec::new(); n] }
    }

    /// Unit-gain graph from an edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, NetError> {
        let mut g = Self::new(n);
        for &(i, j) in edges {
            g.add_edge(i, j, 1.0)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, i: usize, j: usize, gain: f64) -> Result<(), NetError> {
        for idx in [i, j] {
            if idx >= self.n {
                return Err(NetError::StationOutOfRange { index: idx, n: self.n });
            }
        }
        if i == j {
            return Err(NetError::SelfLoop(i));
        }
        if !(gain > 0.0) || !gain.is_finite() {
            return Err(NetError::BadGain(gain));
        }
        let k = key(i, j);
        if self.gains.contains_key(&k) {
            return Err(NetError::DuplicateEdge(k.0, k.1));
        }
        self.gains.insert(k, gain);
        // keep neighbor lists sorted so iteration order is canonical
        let pos = self.adj[i].binary_search(&j).unwrap_err();
        self.adj[i].insert(pos, j);
        let pos = self.adj[j].binary_search(&i).unwrap_err();
        self.adj[j].insert(pos, i);
        Ok(())
    }

    pub fn set_positions(&mut self, positions: Vec<(f64, f64)>) -> Result<(), NetError> {
        if positions.len() != self.n {
            return Err(NetError::InvalidParam(format!(
                "{} positions for {} stations",
                positions.len(),
                self.n
            )));
        }
        self.positions = Some(positions);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.gains.len()
    }

    /// Edges as `(i, j, gain)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.gains.iter().map(|(&(i, j), &g)| (i, j, g))
    }

    pub fn gain(&self, i: usize, j: usize) -> Option<f64> {
        self.gains.get(&key(i, j)).copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.gains.contains_key(&key(i, j))
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn positions(&self) -> Option<&[(f64, f64)]> {
        self.positions.as_deref()
    }
}

/// G(n, p): every unordered pair independently with probability `edge_prob`,
/// unit gains, no positions.
pub fn generate_erdos_renyi<R: Rng + ?Sized>(
    n: usize,
    edge_prob: f64,
    rng: &mut R,
) -> Result<NetworkGraph, NetError> {
    if n == 0 {
        return Err(NetError::InvalidParam("station count must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(NetError::InvalidParam(format!("edge probability {edge_prob} outside [0, 1]")));
    }
    let mut g = NetworkGraph::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < edge_prob {
                g.add_edge(i, j, 1.0)?;
            }
        }
    }
    Ok(g)
}

/// A geometric realization together with the number of empty Poisson draws
/// that were rejected before it.
#[derive(Debug, Clone)]
pub struct GeometricSample {
    pub graph: NetworkGraph,
    pub redraws: u32,
}

/// Poisson point process on the square, Rayleigh fading with path loss,
/// neighbors by received power.
pub fn generate_geometric<R: Rng + ?Sized>(
    lambda: f64,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<GeometricSample, NetError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(NetError::InvalidParam(format!("lambda must be > 0, got {lambda}")));
    }
    params.validate()?;
    let poisson = Poisson::new(lambda).map_err(|e| NetError::InvalidParam(e.to_string()))?;
    let mut redraws = 0u32;
    let n = loop {
        let draw = poisson.sample(rng) as usize;
        if draw > 0 {
            break draw;
        }
        redraws += 1;
    };
    let positions: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random::<f64>() * params.area_km, rng.random::<f64>() * params.area_km))
        .collect();
    let graph = geometric_from_positions(positions, params, |_, _| Exp1.sample(rng))?;
    Ok(GeometricSample { graph, redraws })
}

/// Build the geometric graph for fixed positions. `fading(i, j)` is called
/// once per unordered pair `i < j` in lexicographic order and must return the
/// small-scale power gain of that link.
pub fn geometric_from_positions(
    positions: Vec<(f64, f64)>,
    params: &ChannelParams,
    mut fading: impl FnMut(usize, usize) -> f64,
) -> Result<NetworkGraph, NetError> {
    params.validate()?;
    let n = positions.len();
    let mut g = NetworkGraph::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let (xi, yi) = positions[i];
            let (xj, yj) = positions[j];
            let d = (xi - xj).hypot(yi - yj);
            let gain = params.channel_gain(fading(i, j), d);
            if gain > 0.0 && is_neighbor(gain, params.p_tx, params.mu_dbm) {
                g.add_edge(i, j, gain)?;
            }
        }
    }
    g.set_positions(positions)?;
    Ok(g)
}

/// Mean and population standard deviation of the vertex degrees.
pub fn degree_stats(g: &NetworkGraph) -> (f64, f64) {
    if g.n() == 0 {
        return (0.0, 0.0);
    }
    let n = g.n() as f64;
    let mean = (0..g.n()).map(|i| g.degree(i) as f64).sum::<f64>() / n;
    let var = (0..g.n()).map(|i| (g.degree(i) as f64 - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Serialize to the edge-list text format.
///
/// ```text
/// spinalloc-graph v1 n=<n>
/// i j gain [xi yi xj yj]
/// v i x y
/// ```
///
/// `v` lines only appear for positioned stations that have no edge, so every
/// position survives a round trip. Floats use the shortest representation that
/// parses back to the same value.
pub fn write_edge_list(g: &NetworkGraph) -> String {
    let mut out = format!("{EDGE_LIST_MAGIC} n={}\n", g.n());
    let pos = g.positions();
    for (i, j, gain) in g.edges() {
        match pos {
            Some(p) => {
                let _ = writeln!(out, "{i} {j} {gain} {} {} {} {}", p[i].0, p[i].1, p[j].0, p[j].1);
            }
            None => {
                let _ = writeln!(out, "{i} {j} {gain}");
            }
        }
    }
    if let Some(p) = pos {
        for (i, &(x, y)) in p.iter().enumerate() {
            if g.degree(i) == 0 {
                let _ = writeln!(out, "v {i} {x} {y}");
            }
        }
    }
    out
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, NetError> {
    tok.parse().map_err(|_| NetError::Parse { line, msg: format!("bad {what} '{tok}'") })
}

/// Parse the edge-list text format. Blank lines and `#` comments are skipped.
pub fn parse_edge_list(text: &str) -> Result<NetworkGraph, NetError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .ok_or(NetError::Parse { line: 1, msg: "missing header".into() })?;
    let n_tok = header
        .strip_prefix(EDGE_LIST_MAGIC)
        .map(str::trim)
        .and_then(|rest| rest.strip_prefix("n="))
        .ok_or_else(|| NetError::Parse {
            line: hline,
            msg: format!("expected header '{EDGE_LIST_MAGIC} n=<n>'"),
        })?;
    let n: usize = parse_num(n_tok, hline, "station count")?;

    let mut g = NetworkGraph::new(n);
    let mut positions: Vec<Option<(f64, f64)>> = vec![None; n];
    let mut any_pos = false;
    let mut put_pos = |line: usize, i: usize, p: (f64, f64)| -> Result<(), NetError> {
        match positions[i] {
            Some(old) if old != p => Err(NetError::Parse {
                line,
                msg: format!("conflicting position for station {i}"),
            }),
            _ => {
                positions[i] = Some(p);
                Ok(())
            }
        }
    };

    for (line, l) in lines {
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        let wrap = |e: NetError| NetError::Parse { line, msg: e.to_string() };
        if toks[0] == "v" {
            if toks.len() != 4 {
                return Err(NetError::Parse { line, msg: "expected 'v i x y'".into() });
            }
            let i: usize = parse_num(toks[1], line, "station")?;
            if i >= n {
                return Err(wrap(NetError::StationOutOfRange { index: i, n }));
            }
            let p = (parse_num(toks[2], line, "coordinate")?, parse_num(toks[3], line, "coordinate")?);
            put_pos(line, i, p)?;
            any_pos = true;
            continue;
        }
        if toks.len() != 3 && toks.len() != 7 {
            return Err(NetError::Parse {
                line,
                msg: format!("expected 3 or 7 fields, found {}", toks.len()),
            });
        }
        let i: usize = parse_num(toks[0], line, "station")?;
        let j: usize = parse_num(toks[1], line, "station")?;
        let gain: f64 = parse_num(toks[2], line, "gain")?;
        g.add_edge(i, j, gain).map_err(wrap)?;
        if toks.len() == 7 {
            let c: Vec<f64> = toks[3..]
                .iter()
                .map(|t| parse_num(t, line, "coordinate"))
                .collect::<Result<_, _>>()?;
            put_pos(line, i, (c[0], c[1]))?;
            put_pos(line, j, (c[2], c[3]))?;
            any_pos = true;
        }
    }

    if any_pos {
        let filled: Option<Vec<(f64, f64)>> = positions.into_iter().collect();
        let filled = filled.ok_or(NetError::Parse {
            line: 0,
            msg: "positions given for some stations but not all".into(),
        })?;
        g.set_positions(filled).expect("length checked");
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn triangle() -> NetworkGraph {
        NetworkGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn er_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = generate_erdos_renyi(3, 1.0, &mut rng).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.positions().is_none());
        assert!(g.edges().all(|(_, _, w)| w == 1.0));
        let g = generate_erdos_renyi(5, 0.0, &mut rng).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(generate_erdos_renyi(0, 0.5, &mut rng).is_err());
        assert!(generate_erdos_renyi(4, 1.5, &mut rng).is_err());
    }

    #[test]
    fn er_is_seed_reproducible() {
        let a = generate_erdos_renyi(60, 0.1, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = generate_erdos_renyi(60, 0.1, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn er_mean_degree_matches_binomial_mean() {
        // (n - 1) p = 99 * 0.045 = 4.455
        let mut total = 0.0;
        for seed in 0..1000 {
            let g = generate_erdos_renyi(100, 0.045, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            total += degree_stats(&g).0;
        }
        let mean = total / 1000.0;
        assert!((mean - 4.455).abs() <= 0.2, "mean degree {mean}");
    }

    #[test]
    fn received_power_values() {
        assert!((received_power_dbm(1.0, 100.0).unwrap() - 20.0).abs() < 1e-12);
        let p = received_power_dbm(1e-10, 100.0).unwrap();
        assert!((p + 80.0).abs() < 1e-9);
        assert!(!is_neighbor(1e-10, 100.0, -75.0));
        let g = 10f64.powf(-9.5);
        assert!((received_power_dbm(g, 100.0).unwrap() + 75.0).abs() < 1e-9);
        assert!(is_neighbor(g, 100.0, -75.0));
        assert!(received_power_dbm(0.0, 100.0).is_err());
        assert!(received_power_dbm(1.0, -1.0).is_err());
    }

    #[test]
    fn boundary_pair_is_connected() {
        // place two stations so that the gain lands exactly on -75 dBm
        let params = ChannelParams { ref_gain_db: 0.0, ..ChannelParams::default() };
        // gain = d^-3 = 10^-9.5  =>  d = 10^(9.5/3)
        let d = 10f64.powf(9.5 / 3.0);
        let g = geometric_from_positions(vec![(0.0, 0.0), (d, 0.0)], &params, |_, _| 1.0).unwrap();
        assert_eq!(g.edge_count(), 1);
        let g = geometric_from_positions(vec![(0.0, 0.0), (d * 1.001, 0.0)], &params, |_, _| 1.0)
            .unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn coincident_stations_are_clamped() {
        let params = ChannelParams::default();
        let g = geometric_from_positions(vec![(0.5, 0.5), (0.5, 0.5)], &params, |_, _| 1.0).unwrap();
        let expected = params.channel_gain(1.0, MIN_DISTANCE_KM);
        assert!(g.gain(0, 1).unwrap().is_finite());
        assert_eq!(g.gain(1, 0), Some(expected));
    }

    #[test]
    fn geometric_station_count_is_poisson_mean() {
        let params = ChannelParams::default();
        let mut total = 0usize;
        for seed in 0..1000 {
            let s = generate_geometric(100.0, &params, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            total += s.graph.n();
        }
        let mean = total as f64 / 1000.0;
        assert!((mean - 100.0).abs() <= 1.0, "mean station count {mean}");
    }

    #[test]
    fn geometric_edges_follow_threshold() {
        let params = ChannelParams::default();
        for seed in 0..20 {
            let s = generate_geometric(60.0, &params, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let g = &s.graph;
            for (i, j, gain) in g.edges() {
                assert!(i < j);
                assert_eq!(g.gain(j, i), Some(gain));
                assert!(received_power_dbm(gain, params.p_tx).unwrap() >= params.mu_dbm - 1e-9);
            }
        }
    }

    #[test]
    fn tiny_lambda_redraws_empty_realizations() {
        let params = ChannelParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut redraws = 0;
        for _ in 0..50 {
            let s = generate_geometric(0.2, &params, &mut rng).unwrap();
            assert!(s.graph.n() >= 1);
            redraws += s.redraws;
        }
        assert!(redraws > 0);
    }

    #[test]
    fn degree_stats_examples() {
        assert_eq!(degree_stats(&triangle()), (2.0, 0.0));
        let path = NetworkGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let (m, s) = degree_stats(&path);
        assert!((m - 4.0 / 3.0).abs() < 1e-12);
        let expected = ((2.0 * (1.0f64 - 4.0 / 3.0).powi(2) + (2.0f64 - 4.0 / 3.0).powi(2)) / 3.0).sqrt();
        assert!((s - expected).abs() < 1e-12);
        assert_eq!(degree_stats(&NetworkGraph::new(4)), (0.0, 0.0));
    }

    #[test]
    fn graph_rejects_bad_edges() {
        let mut g = NetworkGraph::new(3);
        assert_eq!(g.add_edge(0, 0, 1.0), Err(NetError::SelfLoop(0)));
        assert!(matches!(g.add_edge(0, 3, 1.0), Err(NetError::StationOutOfRange { .. })));
        assert!(matches!(g.add_edge(0, 1, 0.0), Err(NetError::BadGain(_))));
        g.add_edge(1, 0, 2.0).unwrap();
        assert_eq!(g.add_edge(0, 1, 1.0), Err(NetError::DuplicateEdge(0, 1)));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = triangle();
        let text = write_edge_list(&g);
        assert_eq!(text.lines().count(), 4);
        assert_eq!(parse_edge_list(&text).unwrap(), g);

        let params = ChannelParams::default();
        let s = generate_geometric(40.0, &params, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let back = parse_edge_list(&write_edge_list(&s.graph)).unwrap();
        assert_eq!(back, s.graph);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let err = parse_edge_list("spinalloc-graph v1 n=3\n0 1 1\n1 0 1\n").unwrap_err();
        assert!(matches!(err, NetError::Parse { line: 3, .. }), "{err}");
        let err = parse_edge_list("spinalloc-graph v1 n=3\n0 1\n").unwrap_err();
        assert!(matches!(err, NetError::Parse { line: 2, .. }));
        let err = parse_edge_list("graph n=3\n").unwrap_err();
        assert!(matches!(err, NetError::Parse { line: 1, .. }));
        let err = parse_edge_list("spinalloc-graph v1 n=2\n0 5 1.0\n").unwrap_err();
        assert!(matches!(err, NetError::Parse { line: 2, .. }));
    }
}
