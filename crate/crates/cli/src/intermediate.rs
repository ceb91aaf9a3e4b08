use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use booleval_core::intermediate::{
    mix_intermediate, opening_sentence_samples, read_generic_qa, read_linguistics, read_nli, Family,
};
use booleval_core::rng::{derive_rng, stream_id};
use booleval_core::sample::write_jsonl;
use booleval_core::{load_corpus, BooleanQASample, CorpusKind};
use clap::Args;

use crate::{split_list, Status};

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// NLI rows `{"premise", "hypothesis", "label", "variant"}`.
    #[arg(long)]
    nli: Option<PathBuf>,
    /// Acceptability rows `{"sentence", "acceptable"}`.
    #[arg(long)]
    linguistics: Option<PathBuf>,
    /// Yes/no QA rows `{"question", "context", "answer"}`.
    #[arg(long)]
    generic_qa: Option<PathBuf>,
    /// News articles (summarization corpus) for opening-sentence prediction.
    #[arg(long)]
    news: Option<PathBuf>,
    /// Opening-sentence samples to build from --news. Must be even.
    #[arg(long, default_value_t = 1000)]
    opening_count: usize,
    /// Families to keep.
    #[arg(long, default_value = "nli,self_supervised,linguistics,generic_qa")]
    include: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Mixed output JSONL.
    #[arg(long)]
    out: PathBuf,
    /// Stats JSON; `<out>.stats.json` when omitted.
    #[arg(long)]
    stats: Option<PathBuf>,
}

pub fn run(a: ConvertArgs) -> Result<Status> {
    let include: BTreeSet<Family> =
        split_list(&a.include).iter().map(|f| f.parse::<Family>()).collect::<Result<_, _>>()?;
    let need = |path: &Option<PathBuf>, family: Family| -> Result<Option<PathBuf>> {
        match (include.contains(&family), path) {
            (false, _) => Ok(None),
            (true, Some(p)) if p.is_file() => Ok(Some(p.clone())),
            (true, Some(p)) => bail!("{} input {} does not exist", family.as_str(), p.display()),
            (true, None) => bail!("family {} is included but no input was given", family.as_str()),
        }
    };
    let nli = need(&a.nli, Family::Nli)?;
    let ling = need(&a.linguistics, Family::Linguistics)?;
    let qa = need(&a.generic_qa, Family::GenericQa)?;
    let news = need(&a.news, Family::SelfSupervised)?;

    let mut families = BTreeMap::new();
    if let Some(p) = nli {
        families.insert(Family::Nli, read_nli(p)?);
    }
    if let Some(p) = ling {
        families.insert(Family::Linguistics, read_linguistics(p)?);
    }
    if let Some(p) = qa {
        families.insert(Family::GenericQa, read_generic_qa(p)?);
    }
    if let Some(p) = news {
        let corpus = load_corpus(&p, CorpusKind::Summarization).with_context(|| format!("loading {}", p.display()))?;
        let mut rng = derive_rng(a.seed, stream_id("intermediate.opening"), 0);
        families.insert(Family::SelfSupervised, opening_sentence_samples(&corpus, a.opening_count, &mut rng)?);
    }
    let mut rng = derive_rng(a.seed, stream_id("intermediate.mix"), 0);
    let (records, stats) = mix_intermediate(&families, &include, &mut rng)?;
    let samples: Vec<BooleanQASample> =
        records.iter().enumerate().map(|(i, r)| r.to_sample(a.seed, i as u64)).collect();
    write_jsonl(&a.out, &samples).with_context(|| format!("writing {}", a.out.display()))?;

    let stats_path = a.stats.unwrap_or_else(|| {
        let mut s = a.out.clone().into_os_string();
        s.push(".stats.json");
        PathBuf::from(s)
    });
    let mut report = serde_json::to_value(&stats)?;
    report["seed"] = a.seed.into();
    let text = serde_json::to_string_pretty(&report)?;
    std::fs::write(&stats_path, text.clone() + "\n").with_context(|| format!("writing {}", stats_path.display()))?;
    println!("{text}");
    Ok(Status::Clean)
}
