//! The two competitive rounds of the median-of-means tournament.
//!
//! The preliminary round plays every pair of candidates on the second
//! sample part, provided the distance oracle (first part) lets the match
//! take place. Candidates that never lose qualify. The champions league then
//! plays home matches between qualifiers on the third part and returns a
//! qualifier that wins all of its home matches.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;

use crate::candidate::{Candidate, CandidatePool};
use crate::config::{Fallback, TieBreak, TournamentConfig};
use crate::data::{DataPart, Dataset, Part};
use crate::error::{invalid, Error, Result};
use crate::mom::med_of_means_value;
use crate::oracle::{phi_from_predictions, OracleState};
use crate::partition::{choose_block_count, make_block_partition, BlockPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    FWins,
    HWins,
    Draw,
    Abandoned,
}

impl Outcome {
    pub fn mirrored(self) -> Self {
        match self {
            Outcome::FWins => Outcome::HWins,
            Outcome::HWins => Outcome::FWins,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::FWins => "FWins",
            Outcome::HWins => "HWins",
            Outcome::Draw => "Draw",
            Outcome::Abandoned => "Abandoned",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "FWins" => Outcome::FWins,
            "HWins" => Outcome::HWins,
            "Draw" => Outcome::Draw,
            "Abandoned" => Outcome::Abandoned,
            other => return invalid(format!("unknown match outcome {other:?}")),
        })
    }
}

/// Outcome of one match with its per-block tallies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchRecord {
    pub f_id: usize,
    pub h_id: usize,
    pub outcome: Outcome,
    pub blocks_won_f: usize,
    pub blocks_won_h: usize,
    pub n_blocks: usize,
}

impl MatchRecord {
    fn from_tally(f_id: usize, h_id: usize, won_f: usize, won_h: usize, n_blocks: usize) -> Self {
        let outcome = if 2 * won_f > n_blocks {
            Outcome::FWins
        } else if 2 * won_h > n_blocks {
            Outcome::HWins
        } else {
            Outcome::Draw
        };
        Self {
            f_id,
            h_id,
            outcome,
            blocks_won_f: won_f,
            blocks_won_h: won_h,
            n_blocks,
        }
    }

    fn abandoned(f_id: usize, h_id: usize, n_blocks: usize) -> Self {
        Self {
            f_id,
            h_id,
            outcome: Outcome::Abandoned,
            blocks_won_f: 0,
            blocks_won_h: 0,
            n_blocks,
        }
    }

    /// The same match seen from the other side.
    pub fn mirrored(&self) -> Self {
        Self {
            f_id: self.h_id,
            h_id: self.f_id,
            outcome: self.outcome.mirrored(),
            blocks_won_f: self.blocks_won_h,
            blocks_won_h: self.blocks_won_f,
            n_blocks: self.n_blocks,
        }
    }

    pub fn loser(&self) -> Option<usize> {
        match self.outcome {
            Outcome::FWins => Some(self.h_id),
            Outcome::HWins => Some(self.f_id),
            _ => None,
        }
    }

    pub fn winner(&self) -> Option<usize> {
        match self.outcome {
            Outcome::FWins => Some(self.f_id),
            Outcome::HWins => Some(self.h_id),
            _ => None,
        }
    }
}

/// Candidates that lost no preliminary-round match.
#[derive(Debug, Clone, PartialEq)]
pub struct QualifierSet {
    /// Ascending candidate ids.
    pub ids: Vec<usize>,
    pub round_log: Vec<MatchRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChampionResult {
    pub winner_id: usize,
    /// One record per ordered (home, away) pair; `f_id` is the home side and
    /// `FWins` means the home side won.
    pub home_match_log: Vec<MatchRecord>,
    pub fallback_used: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TournamentOutcome {
    pub champion: Candidate,
    pub qualifiers: QualifierSet,
    pub champions: ChampionResult,
    pub n_blocks: usize,
    pub r1: f64,
    /// The preliminary round produced no qualifier and the champions league
    /// was run over the whole pool with Copeland scoring.
    pub empty_qualifier_fallback: bool,
}

fn check_block(block: &Range<usize>, part: &DataPart<'_>) -> Result<()> {
    if block.is_empty() {
        return invalid("empty block");
    }
    if block.end > part.len() {
        return invalid(format!(
            "block {block:?} exceeds the {} rows of the sample part",
            part.len()
        ));
    }
    Ok(())
}

fn check_partition(partition: &BlockPartition, part: &DataPart<'_>) -> Result<()> {
    if partition.n_used() > part.len() {
        return invalid(format!(
            "partition uses {} rows but the sample part has {}",
            partition.n_used(),
            part.len()
        ));
    }
    Ok(())
}

fn b_stat(pf: &[f64], ph: &[f64], ys: &[f64], block: Range<usize>) -> f64 {
    let m = block.len() as f64;
    let sum: f64 = block
        .map(|i| {
            let rf = pf[i] - ys[i];
            let rh = ph[i] - ys[i];
            rf * rf - rh * rh
        })
        .sum();
    sum / m
}

/// `(2/m) Σ (h(X_i) - f(X_i)) (f(X_i) - Y_i)` with `f` the home side.
fn psi_stat(p_home: &[f64], p_away: &[f64], ys: &[f64], block: Range<usize>) -> f64 {
    let m = block.len() as f64;
    let sum: f64 = block
        .map(|i| (p_away[i] - p_home[i]) * (p_home[i] - ys[i]))
        .sum();
    2.0 * sum / m
}

/// Block average of `(f(X_i) - Y_i)² - (h(X_i) - Y_i)²`; `block` indexes rows
/// of `part2`.
pub fn block_stat_b(
    f: &Candidate,
    h: &Candidate,
    block: Range<usize>,
    part2: &DataPart<'_>,
) -> Result<f64> {
    check_block(&block, part2)?;
    f.check_dim(part2.n_dim)?;
    h.check_dim(part2.n_dim)?;
    let rows = block.clone();
    let pf: Vec<f64> = rows.clone().map(|i| f.predict(part2.row(i))).collect();
    let ph: Vec<f64> = rows.clone().map(|i| h.predict(part2.row(i))).collect();
    Ok(b_stat(&pf, &ph, &part2.ys[rows], 0..block.len()))
}

fn play_on_predictions(
    f_id: usize,
    h_id: usize,
    pf: &[f64],
    ph: &[f64],
    ys: &[f64],
    partition: &BlockPartition,
) -> MatchRecord {
    let (mut won_f, mut won_h) = (0, 0);
    for block in partition.blocks() {
        let b = b_stat(pf, ph, ys, block);
        if b > 0.0 {
            won_h += 1;
        } else if b < 0.0 {
            won_f += 1;
        }
    }
    MatchRecord::from_tally(f_id, h_id, won_f, won_h, partition.n_blocks())
}

/// One preliminary-round match between `f` and `h`.
///
/// Abandoned when the oracle declines; otherwise the side with the smaller
/// empirical loss takes each block (`h` when `B_{f,h}(j) > 0`, `f` when it is
/// `< 0`), and a strict majority of blocks decides the match.
pub fn play_match(
    f: &Candidate,
    h: &Candidate,
    partition: &BlockPartition,
    part2: &DataPart<'_>,
    oracle: &OracleState<'_>,
) -> Result<MatchRecord> {
    check_partition(partition, part2)?;
    f.check_dim(part2.n_dim)?;
    h.check_dim(part2.n_dim)?;
    if !oracle.do_decision(f, h)? {
        return Ok(MatchRecord::abandoned(f.id, h.id, partition.n_blocks()));
    }
    let pf = f.predictions(part2);
    let ph = h.predictions(part2);
    Ok(play_on_predictions(f.id, h.id, &pf, &ph, part2.ys, partition))
}

/// Plays every unordered pair once and keeps the candidates with no loss.
///
/// Matches are evaluated in parallel; the log is ordered by `(f_id, h_id)`
/// with `f_id < h_id`.
pub fn preliminary_round(
    pool: &CandidatePool,
    partition: &BlockPartition,
    part2: &DataPart<'_>,
    oracle: &OracleState<'_>,
) -> Result<QualifierSet> {
    check_partition(partition, part2)?;
    let k = pool.len();
    let oracle_preds = pool
        .candidates()
        .iter()
        .map(|c| oracle.predictions(c))
        .collect::<Result<Vec<_>>>()?;
    for c in pool.candidates() {
        c.check_dim(part2.n_dim)?;
    }
    let part_preds: Vec<Vec<f64>> = pool
        .candidates()
        .par_iter()
        .map(|c| c.predictions(part2))
        .collect();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let round_log = pairs
        .par_iter()
        .map(|&(i, j)| {
            let phi = phi_from_predictions(&oracle_preds[i], &oracle_preds[j], oracle.ell())?;
            Ok(if oracle.decide(phi) {
                play_on_predictions(i, j, &part_preds[i], &part_preds[j], part2.ys, partition)
            } else {
                MatchRecord::abandoned(i, j, partition.n_blocks())
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut lost = vec![false; k];
    for rec in &round_log {
        if let Some(l) = rec.loser() {
            lost[l] = true;
        }
    }
    let ids = (0..k).filter(|&i| !lost[i]).collect();
    Ok(QualifierSet { ids, round_log })
}

/// `(2/m) Σ_{i ∈ block} (h(X_i) - f(X_i)) (f(X_i) - Y_i)` on the third part.
pub fn psi_block_stat(
    f: &Candidate,
    h: &Candidate,
    block: Range<usize>,
    part3: &DataPart<'_>,
) -> Result<f64> {
    check_block(&block, part3)?;
    f.check_dim(part3.n_dim)?;
    h.check_dim(part3.n_dim)?;
    let rows = block.clone();
    let pf: Vec<f64> = rows.clone().map(|i| f.predict(part3.row(i))).collect();
    let ph: Vec<f64> = rows.clone().map(|i| h.predict(part3.row(i))).collect();
    Ok(psi_stat(&pf, &ph, &part3.ys[rows], 0..block.len()))
}

fn home_on_predictions(
    home_id: usize,
    away_id: usize,
    p_home: &[f64],
    p_away: &[f64],
    ys: &[f64],
    partition: &BlockPartition,
    r1: f64,
) -> MatchRecord {
    let threshold = -r1 * r1 / 10.0;
    let held = partition
        .blocks()
        .filter(|b| psi_stat(p_home, p_away, ys, b.clone()) >= threshold)
        .count();
    MatchRecord::from_tally(home_id, away_id, held, partition.n_blocks() - held, partition.n_blocks())
}

fn home_record(
    home: &Candidate,
    away: &Candidate,
    partition: &BlockPartition,
    part3: &DataPart<'_>,
    r1: f64,
) -> Result<MatchRecord> {
    if home.id == away.id {
        return invalid(format!("candidate {} cannot host itself", home.id));
    }
    check_partition(partition, part3)?;
    home.check_dim(part3.n_dim)?;
    away.check_dim(part3.n_dim)?;
    let ph = home.predictions(part3);
    let pa = away.predictions(part3);
    Ok(home_on_predictions(home.id, away.id, &ph, &pa, part3.ys, partition, r1))
}

/// True iff `home` keeps `psi_block_stat(home, away) >= -r1²/10` on more than
/// half of the blocks.
pub fn home_match(
    home: &Candidate,
    away: &Candidate,
    partition: &BlockPartition,
    part3: &DataPart<'_>,
    r1: f64,
) -> Result<bool> {
    Ok(home_record(home, away, partition, part3, r1)?.outcome == Outcome::FWins)
}

/// Champions-league round over the qualifiers, with `r1 = 2 (beta/alpha) r`.
pub fn champions_league(
    qualifiers: &QualifierSet,
    pool: &CandidatePool,
    partition: &BlockPartition,
    part3: &DataPart<'_>,
    config: &TournamentConfig,
) -> Result<ChampionResult> {
    if qualifiers.ids.is_empty() {
        return Err(Error::InvalidState("champions league needs at least one qualifier".into()));
    }
    champions_over(&qualifiers.ids, pool, partition, part3, config, config.fallback)
}

fn champions_over(
    ids: &[usize],
    pool: &CandidatePool,
    partition: &BlockPartition,
    part3: &DataPart<'_>,
    config: &TournamentConfig,
    fallback: Fallback,
) -> Result<ChampionResult> {
    check_partition(partition, part3)?;
    let members = ids
        .iter()
        .map(|&id| {
            let c = pool
                .get(id)
                .ok_or_else(|| Error::InvalidArgument(format!("qualifier id {id} not in pool")))?;
            c.check_dim(part3.n_dim)?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    if members.len() == 1 {
        return Ok(ChampionResult {
            winner_id: members[0].id,
            home_match_log: Vec::new(),
            fallback_used: false,
        });
    }
    let r1 = config.r1();
    let preds: Vec<Vec<f64>> = members.par_iter().map(|c| c.predictions(part3)).collect();
    let q = members.len();
    let home_match_log: Vec<MatchRecord> = (0..q)
        .into_par_iter()
        .flat_map_iter(|a| {
            let (members, preds) = (&members, &preds);
            (0..q).filter(move |&b| b != a).map(move |b| {
                home_on_predictions(members[a].id, members[b].id, &preds[a], &preds[b], part3.ys, partition, r1)
            })
        })
        .collect();
    let mut losses = vec![0usize; q];
    for (idx, chunk) in home_match_log.chunks(q - 1).enumerate() {
        losses[idx] = chunk.iter().filter(|r| r.outcome != Outcome::FWins).count();
    }
    let all_winners: Vec<usize> = (0..q).filter(|&i| losses[i] == 0).collect();
    let (pick_from, fallback_used) = if !all_winners.is_empty() {
        (all_winners, false)
    } else {
        match fallback {
            Fallback::Fail => return Err(Error::NoChampion),
            Fallback::CopelandScore => {
                let fewest = *losses.iter().min().expect("nonempty");
                ((0..q).filter(|&i| losses[i] == fewest).collect(), true)
            }
        }
    };
    let winner = break_tie(&pick_from, &members, &preds, part3.ys, config)?;
    Ok(ChampionResult {
        winner_id: members[winner].id,
        home_match_log,
        fallback_used,
    })
}

/// Index into `members` of the preferred entry among `choices`.
fn break_tie(
    choices: &[usize],
    members: &[&Candidate],
    preds: &[Vec<f64>],
    ys: &[f64],
    config: &TournamentConfig,
) -> Result<usize> {
    if choices.len() == 1 {
        return Ok(choices[0]);
    }
    match config.tie_break {
        TieBreak::LowestId => Ok(*choices
            .iter()
            .min_by_key(|&&i| members[i].id)
            .expect("nonempty")),
        TieBreak::MinMomRisk => {
            let mut best: Option<(f64, usize, usize)> = None;
            for &i in choices {
                let sq: Vec<f64> = preds[i].iter().zip(ys).map(|(p, y)| (p - y) * (p - y)).collect();
                let risk = med_of_means_value(&sq, config.ell.min(sq.len()))?;
                let key = (risk, members[i].id, i);
                best = match best {
                    Some(b) if (b.0, b.1) <= (key.0, key.1) => Some(b),
                    _ => Some(key),
                };
            }
            Ok(best.expect("nonempty").2)
        }
    }
}

/// Runs the full three-stage tournament.
pub fn run_tournament(
    dataset: &Dataset,
    pool: &CandidatePool,
    config: &TournamentConfig,
) -> Result<TournamentOutcome> {
    config.validate()?;
    if pool.n_dim() != dataset.n_dim() {
        return invalid(format!(
            "pool dimension {} differs from data dimension {}",
            pool.n_dim(),
            dataset.n_dim()
        ));
    }
    let n = dataset.part_len();
    let n_blocks = choose_block_count(n, config.r, config.sigma, config.theta)?;
    let partition = make_block_partition(n, n_blocks)?;
    let part1 = dataset.part(Part::First);
    let part2 = dataset.part(Part::Second);
    let part3 = dataset.part(Part::Third);
    let oracle = OracleState::from_config(&part1, config)?;
    let qualifiers = preliminary_round(pool, &partition, &part2, &oracle)?;
    let (champions, empty_qualifier_fallback) = if qualifiers.ids.is_empty() {
        let everyone: Vec<usize> = (0..pool.len()).collect();
        let mut res =
            champions_over(&everyone, pool, &partition, &part3, config, Fallback::CopelandScore)?;
        res.fallback_used = true;
        (res, true)
    } else {
        (champions_league(&qualifiers, pool, &partition, &part3, config)?, false)
    };
    let champion = pool
        .get(champions.winner_id)
        .expect("winner comes from the pool")
        .clone();
    Ok(TournamentOutcome {
        champion,
        qualifiers,
        champions,
        n_blocks,
        r1: config.r1(),
        empty_qualifier_fallback,
    })
}

/// One line per match: `f_id,h_id,outcome,blocks_f,blocks_h`.
pub fn write_match_log(records: &[MatchRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.f_id, r.h_id, r.outcome, r.blocks_won_f, r.blocks_won_h
        ));
    }
    out
}

/// Parses [`write_match_log`] output. The block count is not part of the
/// line format and must be supplied.
pub fn parse_match_log(text: &str, n_blocks: usize) -> Result<Vec<MatchRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(lineno, line)| {
            let err = |message: String| Error::Parse { line: lineno + 1, message };
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 5 {
                return Err(err(format!("expected 5 fields, found {}", fields.len())));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|e| err(format!("{s:?}: {e}")));
            Ok(MatchRecord {
                f_id: num(fields[0])?,
                h_id: num(fields[1])?,
                outcome: fields[2].parse().map_err(|e: Error| err(e.to_string()))?,
                blocks_won_f: num(fields[3])?,
                blocks_won_h: num(fields[4])?,
                n_blocks,
            })
        })
        .collect()
}
