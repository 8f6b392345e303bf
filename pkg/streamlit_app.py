"""
Streamlit front end for the Monte Carlo study and real-data evaluation.
"""

import tempfile
from pathlib import Path

import pandas as pd
import streamlit as st
from dotenv import load_dotenv

from core import __version__
from core.aggregate import get_report_summary_text
from core.config import ExperimentConfig, RealDataConfig, env_workers, parse_transform
from core.errors import FuncGaussError
from core.experiment import run_experiment, run_real_data
from core.scenarios import REAL_DATA_ROSTER, ROSTER, get_scenario, list_scenarios
from utils.durations import parse_trim
from utils.io import create_warnings_text, emit_report, report_to_xlsx


load_dotenv()

st.set_page_config(
    page_title="funcgauss - Gaussian curve classification",
    page_icon="📈",
    layout="wide"
)

XLSX_MIME = "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet"


def progress_reporter(label: str):
    """Progress bar plus a callback updating it; call the returned cleanup when done."""
    progress_bar = st.progress(0)
    status_text = st.empty()

    def update(completed: int, total: int):
        progress_bar.progress(completed / total)
        status_text.text(f"{label}: {completed}/{total}")

    def cleanup():
        progress_bar.empty()
        status_text.empty()

    return update, cleanup


def show_report(report, file_stem: str):
    st.info(get_report_summary_text(report))

    summary = report.summary.copy()
    if report.published:
        summary['published'] = [report.published.get(name, (None, None))[0] for name in summary['classifier']]
    st.dataframe(summary, use_container_width=True)

    if report.warnings:
        with st.expander("Warnings"):
            st.text(create_warnings_text(report.warnings))

    col1, col2 = st.columns(2)
    col1.download_button(
        label="⬇️ Download CSV",
        data=emit_report(report, 'csv'),
        file_name=f"{file_stem}.csv",
        mime="text/csv"
    )
    col2.download_button(
        label="⬇️ Download XLSX",
        data=report_to_xlsx(report),
        file_name=f"{file_stem}.xlsx",
        mime=XLSX_MIME
    )


def monte_carlo_tab(workers: int):
    st.header("Monte Carlo study")

    scenario_id = st.selectbox("Scenario:", options=list_scenarios())
    scenario = get_scenario(scenario_id)
    st.caption(scenario.title)

    col1, col2, col3 = st.columns(3)
    runs = col1.number_input("Runs", min_value=1, max_value=5000, value=50)
    seed = col2.number_input("Seed", min_value=0, value=0)
    n_intervals = col3.number_input("Grid intervals N", min_value=10, max_value=500, value=50)

    roster = st.multiselect("Classifiers:", options=list(ROSTER), default=list(ROSTER))

    if st.button("🚀 Run experiment", type="primary"):
        if not roster:
            st.error("Select at least one classifier")
            st.stop()

        cfg = ExperimentConfig.from_scenario(
            scenario_id, runs=int(runs), seed=int(seed),
            n_intervals=int(n_intervals), roster=tuple(roster)
        )
        update, cleanup = progress_reporter("Runs")
        try:
            report = run_experiment(cfg, max_workers=workers, progress_callback=update)
        except FuncGaussError as e:
            st.error(f"❌ {e}")
            st.stop()
        finally:
            cleanup()

        st.session_state['report'] = report
        st.session_state['report_name'] = scenario_id

    if 'report' in st.session_state:
        show_report(st.session_state['report'], st.session_state['report_name'])


def real_data_tab(workers: int):
    st.header("Real data (leave-one-out)")

    uploaded = st.file_uploader("Curve CSV (label, then one column per sampling time):", type=['csv'])

    col1, col2, col3 = st.columns(3)
    transform = col1.text_input("Transform", value="identity", help="identity or log-offset:<offset>")
    trim = col2.text_input("Trim", value="0", help="Sample count or duration such as 3min")
    interval = col3.number_input("Sampling interval (s)", min_value=0.001, value=10.0)

    roster = st.multiselect("Classifiers:", options=list(REAL_DATA_ROSTER), default=list(REAL_DATA_ROSTER))

    if uploaded and st.button("🚀 Evaluate", type="primary"):
        with tempfile.TemporaryDirectory() as folder:
            path = Path(folder) / uploaded.name
            path.write_bytes(uploaded.getvalue())

            update, cleanup = progress_reporter("Folds")
            try:
                name, offset = parse_transform(transform)
                cfg = RealDataConfig(
                    input_path=path, transform=name, offset=offset,
                    trim=parse_trim(trim, interval), roster=tuple(roster)
                )
                report = run_real_data(cfg, max_workers=workers, progress_callback=update)
            except FuncGaussError as e:
                st.error(f"❌ {e}")
                st.stop()
            finally:
                cleanup()

        st.session_state['real_report'] = report

    if 'real_report' in st.session_state:
        show_report(st.session_state['real_report'], 'realdata')


def timing_tab():
    st.header("Classifier timing")

    shown = False
    for key, title in (('report', 'Monte Carlo'), ('real_report', 'Real data')):
        if key in st.session_state:
            timing = st.session_state[key].timing
            st.subheader(title)
            st.dataframe(pd.DataFrame(timing), use_container_width=True)
            shown = True

    if not shown:
        st.info("Run an experiment first.")


def main():
    """Main Streamlit application."""

    st.title("📈 Gaussian curve classification")
    st.markdown(f"*Bayes, plug-in and k-NN rules for functional data* • `v{__version__}`")

    with st.sidebar:
        st.header("⚙️ Settings")
        workers = st.number_input("Parallel workers", min_value=1, max_value=64, value=env_workers())

        st.divider()
        if st.button("🔄 Reset", use_container_width=True):
            for key in list(st.session_state.keys()):
                del st.session_state[key]
            st.rerun()

    tab1, tab2, tab3 = st.tabs(["🎲 Monte Carlo", "🧪 Real data", "⏱️ Timing"])

    with tab1:
        monte_carlo_tab(int(workers))
    with tab2:
        real_data_tab(int(workers))
    with tab3:
        timing_tab()


if __name__ == "__main__":
    main()
