// Status banner, error banner with retry, and the main-only config picker.
// Followers get no regular 2D UI: overlapping projections make it unreadable,
// so anything beyond a status line renders on the main instance only.

export interface Overlay {
  setStatus(text: string): void;
  showStatusOnly(show: boolean): void;
  showError(text: string, onRetry?: () => void): void;
  clearError(): void;
  showConfigPicker(ids: string[], active: string | null, onPick: (id: string) => void): void;
  hideConfigPicker(): void;
}

const PANEL_CSS =
  "position:absolute;left:12px;font:13px/1.5 system-ui,sans-serif;" +
  "background:rgba(10,12,16,0.82);color:#dde3ea;padding:8px 12px;" +
  "border-radius:6px;z-index:20;max-width:46ch;";

export function createOverlay(root: HTMLElement): Overlay {
  const status = document.createElement("div");
  status.style.cssText = PANEL_CSS + "top:12px;";
  root.appendChild(status);

  const error = document.createElement("div");
  error.style.cssText =
    PANEL_CSS + "top:50%;left:50%;transform:translate(-50%,-50%);" +
    "background:rgba(96,18,24,0.92);display:none;";
  root.appendChild(error);

  const picker = document.createElement("div");
  picker.style.cssText = PANEL_CSS + "bottom:12px;top:auto;display:none;";
  const pickerLabel = document.createElement("span");
  pickerLabel.textContent = "configuration: ";
  const select = document.createElement("select");
  select.style.cssText = "margin-left:6px;background:#1a1f27;color:#dde3ea;border:1px solid #3a4250;border-radius:4px;padding:2px 6px;";
  picker.appendChild(pickerLabel);
  picker.appendChild(select);
  root.appendChild(picker);

  let onPickCallback: ((id: string) => void) | null = null;
  select.addEventListener("change", () => {
    if (select.value && onPickCallback) onPickCallback(select.value);
  });

  return {
    setStatus(text) {
      status.textContent = text;
    },
    showStatusOnly(show) {
      status.style.display = show ? "block" : "none";
    },
    showError(text, onRetry) {
      error.textContent = text;
      if (onRetry) {
        const button = document.createElement("button");
        button.textContent = "retry";
        button.style.cssText =
          "margin-left:10px;background:#2a313c;color:#dde3ea;" +
          "border:1px solid #4a5260;border-radius:4px;padding:2px 10px;cursor:pointer;";
        button.addEventListener("click", () => {
          error.style.display = "none";
          onRetry();
        });
        error.appendChild(button);
      }
      error.style.display = "block";
    },
    clearError() {
      error.style.display = "none";
      error.textContent = "";
    },
    showConfigPicker(ids, active, onPick) {
      onPickCallback = onPick;
      select.replaceChildren();
      const placeholder = document.createElement("option");
      placeholder.value = "";
      placeholder.textContent = "(pick)";
      select.appendChild(placeholder);
      for (const id of ids) {
        const option = document.createElement("option");
        option.value = id;
        option.textContent = id;
        if (id === active) option.selected = true;
        select.appendChild(option);
      }
      picker.style.display = "block";
    },
    hideConfigPicker() {
      picker.style.display = "none";
    },
  };
}
