/**
 * Browser bootstrap: hash-routed tabs wired to the view controllers.
 *
 * All rendering goes through the pure view functions; this file only owns the
 * DOM glue (innerHTML swaps and event delegation), so everything above it is
 * testable without a browser.
 */

import { ApiClient } from "./api.js";
import { EnrollController, renderEnrollForm, renderRoster } from "./views/enroll.js";
import { ReportsController, renderReports } from "./views/reports.js";
import { TriageController, renderTriage } from "./views/triage.js";

type Tab = "triage" | "enroll" | "reports";

function isoDate(d: Date): string {
  return d.toISOString().slice(0, 10);
}

function currentTab(): Tab {
  const hash = window.location.hash.replace("#", "");
  if (hash.startsWith("enroll")) return "enroll";
  if (hash.startsWith("reports")) return "reports";
  return "triage";
}

function main(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");

  const api = new ApiClient("");
  const render = () => paint();

  const triage = new TriageController(api, render);
  const enroll = new EnrollController(api, render);
  const today = new Date();
  const reports = new ReportsController(
    api,
    {
      from: isoDate(new Date(today.getFullYear(), 0, 1)),
      to: isoDate(today),
      year: today.getFullYear(),
    },
    render,
  );

  function paint(): void {
    const tab = currentTab();
    const nav = (["triage", "enroll", "reports"] as Tab[])
      .map(
        (name) =>
          `<a href="#${name}" class="${name === tab ? "active" : ""}">${name}</a>`,
      )
      .join("");
    let body = "";
    if (tab === "triage") {
      body = renderTriage(triage.state);
    } else if (tab === "enroll") {
      body = renderEnrollForm(enroll.state) + renderRoster(reports.state.rows);
    } else {
      body = renderReports(reports.state);
    }
    root!.innerHTML = `<nav class="tabs">${nav}</nav><main>${body}</main>`;
  }

  window.addEventListener("hashchange", () => {
    const tab = currentTab();
    if (tab === "triage") void triage.load();
    if (tab !== "triage") void reports.loadPercentages();
    paint();
  });

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement | null;
    const button = target?.closest<HTMLElement>("[data-action]");
    if (!button) return;
    const action = button.dataset.action;
    const strangerId = Number(button.dataset.stranger ?? "0");
    if (action === "link") {
      event.preventDefault();
      void triage.link(strangerId, Number(button.dataset.student));
    } else if (action === "link-custom") {
      event.preventDefault();
      const input = root.querySelector<HTMLInputElement>(
        `input.link-id[data-stranger="${strangerId}"]`,
      );
      const studentId = Number(input?.value ?? "");
      if (studentId > 0) void triage.link(strangerId, studentId);
    } else if (action === "confirm") {
      event.preventDefault();
      void triage.confirm(strangerId);
    } else if (action === "load-percentages") {
      event.preventDefault();
      void reports.loadPercentages();
    } else if (action === "show-attendance") {
      event.preventDefault();
      void reports.loadMonthly(Number(button.dataset.student));
    }
  });

  root.addEventListener("submit", (event) => {
    const form = event.target as HTMLFormElement | null;
    if (form?.dataset.form !== "enroll") return;
    event.preventDefault();
    void enroll.submit().then((id) => {
      if (id !== null) void reports.loadPercentages();
    });
  });

  root.addEventListener("input", (event) => {
    const input = event.target as HTMLInputElement | null;
    if (!input?.name) return;
    if (input.name === "name") enroll.state.name = input.value;
    if (input.name === "roll") enroll.state.roll = input.value;
    if (input.name === "contact") enroll.state.contact = input.value;
    if (input.name === "from") reports.state.from = input.value;
    if (input.name === "to") reports.state.to = input.value;
    if (input.name === "scans" && input.files) {
      const files = Array.from(input.files);
      void Promise.all(
        files.map(async (file) => ({ name: file.name, text: await file.text() })),
      ).then((scans) => {
        enroll.state.scans = scans;
        paint();
      });
    }
  });

  void triage.load();
  void reports.loadPercentages();
  paint();
}

main();
