use metaemu_core::ingestion::EmulationFile;
use metaemu_service::api::{combine, CombineRequest, SourceBody, COMBINE_REQUEST_SCHEMA};

use crate::args::{CombineArgs, Format};
use crate::error::CliError;
use crate::output::{emit, table};

pub fn run(args: &CombineArgs, format: Format) -> Result<(), CliError> {
    let sources = args
        .inputs
        .iter()
        .map(|p| {
            EmulationFile::<f64>::load(p).map(|f| SourceBody {
                label: f.label,
                results: f.results,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let response = combine(&CombineRequest {
        schema: Some(COMBINE_REQUEST_SCHEMA.to_string()),
        sources,
    })?;
    let json = serde_json::to_string_pretty(&response).expect("combine response serializes") + "\n";
    if let Some(p) = &args.out {
        emit(&json, Some(p))?;
    }
    match format {
        Format::Structured => emit(&json, None),
        Format::Text => {
            let mut header = vec!["tau".to_string(), "mu".to_string(), "sigma".to_string()];
            if let Some(first) = response.summaries.first() {
                header.extend(first.inputs.iter().map(|i| i.label.clone()));
            }
            let rows: Vec<Vec<String>> = response
                .summaries
                .iter()
                .map(|s| {
                    let mut row = vec![
                        format!("{:.2}", s.tau),
                        format!("{:.3}", s.mu_combined),
                        format!("{:.3}", s.sigma_combined),
                    ];
                    row.extend(s.inputs.iter().map(|i| format!("{:.2} ({:.2})", i.mu, i.sigma)));
                    row
                })
                .collect();
            emit(&table(&header, &rows), None)
        }
    }
}
