import type { SessionView } from './types.js';

export type StoreListener = (view: SessionView | null) => void;

// Single source of truth for the play screen. Only acknowledged server
// views go in; the UI re-renders from the stored view and nothing else,
// so the board can never drift from the session state.
export class SessionStore {
  private view: SessionView | null = null;
  private listeners: StoreListener[] = [];

  current(): SessionView | null {
    return this.view;
  }

  accept(view: SessionView): void {
    this.view = view;
    for (const listener of this.listeners) listener(view);
  }

  clear(): void {
    this.view = null;
    for (const listener of this.listeners) listener(null);
  }

  subscribe(listener: StoreListener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }
}
